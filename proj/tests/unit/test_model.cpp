#include <coaxdisp/model.hpp>

#include <gtest/gtest.h>

using namespace coaxdisp;

namespace {

errc code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return errc::config;
}

} // namespace

TEST(Model, ReferenceCableIsValid)
{
    const auto s = reference_cable();
    EXPECT_EQ(s.size(), 11u);
    EXPECT_NO_THROW(s.validate());
    EXPECT_DOUBLE_EQ(s.layers.front().radius, 24.3e-3);
    EXPECT_DOUBLE_EQ(s.layers.back().radius, 58.5e-3);
    EXPECT_DOUBLE_EQ(s.layers[9].mu_r, 40.0);
}

TEST(Model, ContextMaterials)
{
    const auto s = reference_cable();
    const spectral_context c(s, 1000.0);
    EXPECT_EQ(c.eps.size(), 12u);
    EXPECT_NEAR(c.k0, 2.0 * constants::pi * 1000.0 / constants::c0, 1e-20);
    // eps = eps_r + i sigma/(omega eps0)
    EXPECT_DOUBLE_EQ(c.eps[3].imag(), 0.0);
    EXPECT_NEAR(c.eps[0].imag(), 4.81e7 / (c.omega * constants::eps0), 1e-6 * c.eps[0].imag());
    EXPECT_TRUE(c.lossy(0));
    EXPECT_FALSE(c.lossy(c.n()));
}

TEST(Model, SkinDepthOfCopperCore)
{
    // delta = sqrt(2/(omega mu sigma)) = 2.295 mm at 1 kHz for sigma = 4.81e7 S/m
    const spectral_context c(reference_cable(), 1000.0);
    const cplx kappa = transverse_wavenumber(c, 0, 0.0);
    EXPECT_NEAR(1.0 / kappa.imag(), 2.295e-3, 0.001e-3);
    EXPECT_NEAR(kappa.real(), kappa.imag(), 1e-9 * kappa.imag());
}

TEST(Model, TransverseWavenumberBranch)
{
    const spectral_context c(reference_cable(), 150.0);
    const double k0 = c.k0;
    // lossless exterior, alpha = 0 lies on the cut: outgoing real positive root
    EXPECT_NEAR(std::abs(transverse_wavenumber(c, c.n(), 0.0) - k0), 0.0, 1e-15 * k0);
    // guided region alpha > k0: evanescent, kappa = i sqrt(alpha^2 - k0^2)
    const cplx k = transverse_wavenumber(c, c.n(), 2.0 * k0);
    EXPECT_NEAR(k.real(), 0.0, 1e-20);
    EXPECT_NEAR(k.imag(), std::sqrt(3.0) * k0, 1e-12 * k0);
    // principal branch everywhere else: 0 < arg kappa <= pi
    for (double re : {-3.0, -0.5, 0.5, 3.0})
        for (double im : {1e-3, 0.5, 4.0}) {
            const cplx a = k0 * cplx(re, im);
            for (std::size_t i = 0; i <= c.n(); ++i) {
                const cplx kk = transverse_wavenumber(c, i, a);
                EXPECT_GT(std::arg(kk), 0.0);
                EXPECT_LE(std::arg(kk), constants::pi);
                EXPECT_NEAR(std::abs(kk * kk - (c.k2(i) - a * a)), 0.0, 1e-12 * std::abs(c.k2(i) - a * a));
            }
        }
}

TEST(Model, BranchPoint)
{
    auto s = reference_cable();
    EXPECT_NEAR(std::abs(branch_point(spectral_context(s, 150.0)) - 2.0 * constants::pi * 150.0 / constants::c0), 0.0, 1e-20);
    s.exterior.eps_r = 4.0;
    s.exterior.sigma = 4.0;
    const spectral_context c(s, 150.0);
    const cplx ac = branch_point(c);
    EXPECT_NEAR(std::abs(ac * ac - c.k2(c.n())), 0.0, 1e-12 * std::abs(ac * ac));
    EXPECT_GT(ac.imag(), 0.0);
    // sqrt of a rounding-level difference: sqrt(eps) |ac| is the floor
    EXPECT_NEAR(std::abs(transverse_wavenumber(c, c.n(), ac)), 0.0, 1e-7 * std::abs(ac));
}

TEST(Model, Validation)
{
    auto s = reference_cable();
    s.layers[3].radius = s.layers[2].radius;
    EXPECT_EQ(code_of([&] { s.validate(); }), errc::invalid_model);

    s = reference_cable();
    s.layers[0].sigma = 0.0;
    EXPECT_EQ(code_of([&] { s.validate(); }), errc::invalid_model);

    s = reference_cable();
    s.layers[3].eps_r = 0.5;
    EXPECT_EQ(code_of([&] { s.validate(); }), errc::invalid_model);
    s.layers[3].low_eps_ok = true;
    EXPECT_NO_THROW(s.validate());

    s = reference_cable();
    s.exterior.mu_r = -1.0;
    EXPECT_EQ(code_of([&] { s.validate(); }), errc::invalid_model);

    s.layers.clear();
    EXPECT_EQ(code_of([&] { s.validate(); }), errc::invalid_model);

    EXPECT_EQ(code_of([] { spectral_context(reference_cable(), 0.0); }), errc::invalid_model);
}
