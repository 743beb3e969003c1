#include <coaxdisp/bessel.hpp>

#include <gtest/gtest.h>

#include <array>
#include <random>
#include <vector>

using namespace coaxdisp;

namespace {

struct ref_row {
    double zr, zi;
    double v[12];
};

const std::vector<ref_row>& table()
{
    static const std::vector<ref_row> t = {
#include "oracles/bessel_table.inc"
    };
    return t;
}

std::array<cplx, 6> as_array(const bessel::scaled& s) { return {s.j0, s.j1, s.h0_1, s.h1_1, s.h0_2, s.h1_2}; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(Bessel, MatchesHighPrecisionTable)
{
    ASSERT_GT(table().size(), 300u);
    double worst = 0.0;
    for (const auto& r : table()) {
        const cplx z(r.zr, r.zi);
        const auto got = as_array(bessel::eval_scaled(z));
        // componentwise, relative to the largest of the pair so zeros of J do not dominate
        for (int k = 0; k < 6; ++k) {
            const cplx want(r.v[2 * k], r.v[2 * k + 1]);
            const double scale = k < 2 ? std::max(std::abs(want), std::abs(cplx(r.v[0], r.v[1])) + std::abs(cplx(r.v[2], r.v[3])))
                                       : std::abs(want);
            const double e = std::abs(got[k] - want) / scale;
            worst = std::max(worst, e);
            EXPECT_LT(e, 1e-12) << "z = " << z << " component " << k;
        }
    }
    RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Bessel, WronskianOnRandomUpperHalfPlane)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lr(-4.0, 2.5), th(0.0, constants::pi);
    for (int k = 0; k < 5000; ++k) {
        const double r = std::pow(10.0, lr(rng));
        const cplx z = std::polar(r, th(rng));
        const double ref = std::abs(4.0 / (constants::pi * z));
        EXPECT_LT(std::abs(bessel::wronskian_defect(z)) / ref, 1e-10) << z;
    }
}

TEST(Bessel, ConnectionFormula)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> lr(-4.0, 2.5), th(0.0, constants::pi);
    for (int k = 0; k < 5000; ++k) {
        const cplx z = std::polar(std::pow(10.0, lr(rng)), th(rng));
        const auto s = bessel::eval_scaled(z);
        const cplx e2 = std::exp(2.0 * I * z); // |e2| <= 1 in the upper half-plane
        EXPECT_LT(std::abs(s.j0 - 0.5 * (e2 * s.h0_1 + s.h0_2)), 1e-10 * (std::abs(s.j0) + std::abs(s.h0_2))) << z;
        EXPECT_LT(std::abs(s.j1 - 0.5 * (e2 * s.h1_1 + s.h1_2)), 1e-10 * (std::abs(s.j1) + std::abs(s.h1_2))) << z;
    }
}

TEST(Bessel, ContinuousAcrossRegimeSeams)
{
    // extrapolate each side linearly to the seam so the slope does not count as a jump
    const auto side = [](double r, double t, double d) {
        const auto a = as_array(bessel::eval_scaled(std::polar(r * (1.0 + d), t)));
        const auto b = as_array(bessel::eval_scaled(std::polar(r * (1.0 + 3.0 * d), t)));
        std::array<cplx, 6> e;
        for (int k = 0; k < 6; ++k) e[k] = 1.5 * a[k] - 0.5 * b[k];
        return e;
    };
    for (double r : {bessel::series_radius, 7.0, 8.0, 9.0, bessel::asymptotic_radius}) {
        for (double t : {0.0, 0.4, 1.1, constants::pi / 2, 2.2, 2.9, constants::pi}) {
            const auto a = side(r, t, -1e-10), b = side(r, t, 1e-10);
            for (int k = 2; k < 6; ++k) EXPECT_LT(rel(a[k], b[k]), 1e-12) << "r = " << r << " t = " << t;
        }
    }
}

TEST(Bessel, SeriesAgreesWithIntegralBetweenSevenAndNine)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> rr(7.0, 9.0), th(0.0, constants::pi);
    for (int k = 0; k < 200; ++k) {
        const cplx z = std::polar(rr(rng), th(rng));
        const auto sm = bessel::eval_small(z);
        const auto p = bessel::eval(z);
        EXPECT_LT(rel(sm.j0, p.j0), 1e-11) << z;
        EXPECT_LT(rel(sm.j1_over_z * z, p.j1), 1e-11) << z;
        const auto rp = bessel::neumann_regular_parts(z);
        const cplx l = (2.0 / constants::pi) * std::log(0.5 * z);
        const cplx y0 = (p.h0_1 - p.h0_2) / (2.0 * I);
        EXPECT_LT(std::abs(rp.b - (y0 - l * p.j0)), 1e-10 * std::max(1.0, std::abs(y0))) << z;
    }
}

TEST(Bessel, SmallArgumentLimits)
{
    const cplx z(1e-8, 2e-8);
    const auto s = bessel::eval_small(z);
    EXPECT_NEAR(std::abs(s.j0 - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.j1_over_z - 0.5), 0.0, 1e-15);
    // Y0 regular part at 0 is (2/pi) gamma; zC(z) -> -2/pi
    EXPECT_NEAR(std::abs(s.b - 2.0 / constants::pi * constants::gamma), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.zc + 2.0 / constants::pi), 0.0, 1e-14);
}

TEST(Bessel, ReflectionAcrossImaginaryAxis)
{
    // J0(-conj z) = conj J0(z), J1(-conj z) = -conj J1(z), H0(-conj z) = -conj H0(z), H1(-conj z) = conj H1(z)
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> lr(-2.0, 1.7), th(0.05, constants::pi / 2);
    for (int k = 0; k < 300; ++k) {
        const cplx z = std::polar(std::pow(10.0, lr(rng)), th(rng));
        const auto p = bessel::eval(z), q = bessel::eval(-std::conj(z));
        EXPECT_LT(rel(q.j0, std::conj(p.j0)), 1e-11) << z;
        EXPECT_LT(rel(q.j1, -std::conj(p.j1)), 1e-11) << z;
        EXPECT_LT(rel(q.h0_1, -std::conj(p.h0_1)), 1e-11) << z;
        EXPECT_LT(rel(q.h1_1, std::conj(p.h1_1)), 1e-11) << z;
    }
}

TEST(Bessel, ScaledHankelStaysBounded)
{
    for (double r : {30.0, 1e3, 1e5, 1e8})
        for (double t : {0.0, 0.7, constants::pi / 2, 2.5, constants::pi}) {
            const cplx z = std::polar(r, t);
            const auto s = bessel::eval_scaled(z);
            const double amp = std::sqrt(2.0 / (constants::pi * r));
            const double tol = 0.5 / r + 1e-10; // next asymptotic term is (4 nu^2 - 1) / (8 z)
            EXPECT_NEAR(std::abs(s.h0_1) / amp, 1.0, tol) << z;
            EXPECT_NEAR(std::abs(s.h1_1) / amp, 1.0, tol) << z;
        }
}

TEST(Bessel, Errors)
{
    const auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const error& e) {
            return e.code();
        }
        return errc::config;
    };
    EXPECT_EQ(code_of([] { bessel::eval_scaled(cplx(NAN, 0.0)); }), errc::non_finite);
    EXPECT_EQ(code_of([] { bessel::wronskian_defect(0.0); }), errc::pole_at_zero);
    EXPECT_EQ(code_of([] { bessel::neumann_regular_parts(0.0); }), errc::pole_at_zero);
    EXPECT_EQ(code_of([] { bessel::eval(cplx(0.0, 2000.0)); }), errc::overflow);
    EXPECT_NO_THROW(bessel::eval_scaled(cplx(0.0, 2000.0)));
}
