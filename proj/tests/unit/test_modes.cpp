#include <coaxdisp/modes.hpp>

#include <gtest/gtest.h>

using namespace coaxdisp;

namespace {

constexpr double db = constants::db_per_100km;

// Windows around the quasi-TEM and the surface-like pole at 150 Hz, in (alpha/k0, dB/100 km).
search_region window_c1() { return {2.0, 3.0, 1.0 / db, 4.0 / db, 2, 2}; }
search_region window_c2() { return {1.02, 1.06, 0.05 / db, 0.2 / db, 2, 2}; }

contour window_contour(const spectral_context& c, const search_region& r)
{
    return contour::rectangle(cplx(r.re_lo * c.k0, r.im_lo), cplx(r.re_hi * c.k0, r.im_hi));
}

// Plain Newton iteration on det A with a central-difference derivative.
cplx newton(const spectral_context& c, cplx a)
{
    const auto f = [&](cplx x) { return det_dispersion(c, x, scaling::none).value(); };
    for (int it = 0; it < 50; ++it) {
        const cplx h = 1e-7 * std::abs(a);
        const cplx d = (f(a + h) - f(a - h)) / (2.0 * h);
        const cplx step = f(a) / d;
        a -= step;
        if (std::abs(step) < 1e-15 * std::abs(a)) break;
    }
    return a;
}

} // namespace

TEST(Modes, ArgumentPrincipleOnPolynomial)
{
    const auto p = [](cplx z) { return (z - cplx(1.0, 1.0)) * (z - cplx(3.0, 1.0)) * (z - cplx(3.2, 1.1)); };
    EXPECT_EQ(count_zeros_of(p, contour::rectangle({0.0, 0.0}, {2.0, 2.0})).winding, 1);
    EXPECT_EQ(count_zeros_of(p, contour::rectangle({0.0, 0.0}, {4.0, 2.0})).winding, 3);
    EXPECT_EQ(count_zeros_of(p, contour::rectangle({0.0, 1.5}, {4.0, 2.0})).winding, 0);
    const auto z = locate_zero_of(p, contour::rectangle({2.5, 0.5}, {2.9 + 0.2, 1.05}));
    EXPECT_LT(std::abs(z.alpha - cplx(3.0, 1.0)), 1e-12);
    EXPECT_THROW(locate_zero_of(p, contour::rectangle({2.5, 0.5}, {4.0, 2.0})), error);
}

TEST(Modes, ZeroOnContourIsRejected)
{
    const auto p = [](cplx z) { return z - cplx(1.0, 1.0); };
    try {
        count_zeros_of(p, contour::rectangle({1.0, 0.0}, {2.0, 2.0}));
        FAIL() << "expected an error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::contour_too_close);
    }
}

TEST(Modes, ContourCrossingTheExteriorCutIsRejected)
{
    const spectral_context c(reference_cable(), 150.0);
    const contour x = contour::rectangle(cplx(0.5 * c.k0, -1e-9), cplx(2.0 * c.k0, 1e-6));
    EXPECT_TRUE(crosses_cut(c, x));
    EXPECT_THROW(count_zeros(c, x), error);
    EXPECT_FALSE(crosses_cut(c, window_contour(c, window_c1())));
}

TEST(Modes, WindowsAtOneFiftyHertzHoldOnePoleEach)
{
    const spectral_context c(reference_cable(), 150.0);
    for (const auto& w : {window_c1(), window_c2()}) {
        const contour k = window_contour(c, w);
        EXPECT_EQ(count_zeros(c, k).winding, 1);
        const auto m = locate_pole(c, k);
        EXPECT_LT(m.residual, 1e-6);
        EXPECT_TRUE(k.contains(m.alpha));
        const cplx nw = newton(c, m.alpha);
        EXPECT_LT(std::abs(nw - m.alpha) / std::abs(m.alpha), 1e-8);
    }
}

TEST(Modes, QuasiTemPoleAtOneFiftyHertz)
{
    const spectral_context c(reference_cable(), 150.0);
    const auto m = locate_pole(c, window_contour(c, window_c1()));
    const double n = m.alpha.real() / c.k0;
    EXPECT_NEAR(n, 2.42375, 1e-5);
    EXPECT_NEAR(m.alpha.imag() * db, 2.4271, 1e-3);
    EXPECT_GT(c.k0 / m.alpha.real(), 0.0);
    EXPECT_LT(c.k0 / m.alpha.real(), 1.0);
    EXPECT_GT(m.alpha.imag(), 0.0);
}

TEST(Modes, RegionSearchFindsThreePolesRightOfTheCut)
{
    const spectral_context c(reference_cable(), 150.0);
    const auto rep = find_poles(c, {1.0, 20.0, 0.0, 3e-4, 4, 2});
    ASSERT_EQ(rep.poles.size(), 3u);
    EXPECT_EQ(rep.total_count, 3);
    EXPECT_TRUE(rep.clusters.empty());
    EXPECT_NEAR(rep.poles[0].alpha.real() / c.k0, 10.6761, 1e-4);
    EXPECT_NEAR(rep.poles[1].alpha.real() / c.k0, 2.42375, 1e-5);
    EXPECT_NEAR(rep.poles[2].alpha.real() / c.k0, 1.03679, 1e-5);
}

TEST(Modes, SearchSurvivesGridLinesThroughPoles)
{
    // the quasi-TEM pole sits on the middle grid line of this region
    const spectral_context c(reference_cable(), 150.0);
    const auto rep = find_poles(c, {2.0, 2.8475, 0.0, 1e-5, 2, 1});
    ASSERT_EQ(rep.poles.size(), 1u);
    EXPECT_NEAR(rep.poles[0].alpha.real() / c.k0, 2.42375, 1e-5);
}

TEST(Modes, SeedRegionMustIsolateOnePole)
{
    const auto s = reference_cable();
    try {
        seed_pole(s, 150.0, {1.0, 20.0, 0.0, 3e-4, 4, 2});
        FAIL() << "expected an error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_simple_zero);
    }
    const auto second = seed_pole(s, 150.0, {1.0, 20.0, 0.0, 3e-4, 4, 2}, 2);
    EXPECT_NEAR(second.alpha.real() / spectral_context(s, 150.0).k0, 2.42375, 1e-5);
}

TEST(Modes, TraceFollowsQuasiTemMode)
{
    const auto s = reference_cable();
    const std::vector<double> f{150.0, 300.0, 600.0, 1000.0, 2000.0, 5000.0, 10000.0};
    const auto tr = trace_mode(s, f, window_c1());
    ASSERT_EQ(tr.size(), f.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const spectral_context c(s, f[k]);
        EXPECT_DOUBLE_EQ(tr[k].freq, f[k]);
        EXPECT_LT(tr[k].residual, 1e-6);
        EXPECT_GT(tr[k].alpha.real() / c.k0, 1.7);
        if (k > 0) {
            // phase index falls and attenuation rises with frequency
            EXPECT_LT(tr[k].alpha.real() / c.k0, tr[k - 1].alpha.real() / spectral_context(s, f[k - 1]).k0);
            EXPECT_GT(tr[k].alpha.imag(), tr[k - 1].alpha.imag());
        }
    }
    EXPECT_NEAR(tr[3].alpha.real() / spectral_context(s, 1000.0).k0, 1.857472, 1e-5);
}
