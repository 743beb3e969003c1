#ifndef COAXDISP_DISPERSION_HPP
#define COAXDISP_DISPERSION_HPP

#include "bessel.hpp"
#include "model.hpp"

#include <cmath>

namespace coaxdisp {

// none: plain Bessel values throughout.
// analytic: only lossy layers (and the exterior) carry exponential scale factors, so
//   the mantissa of det A stays analytic in alpha across lossless-layer branch lines.
// full: every layer scaled; used where scales cancel pointwise (F, q).
enum class scaling { none, analytic, full };

struct scaled_value {
    cplx mantissa{};
    cplx log_scale{};
    cplx value() const { return mantissa * std::exp(log_scale); }
};

// unscaled f = e^{scale_log} f (stored), same for g
struct determinant_pair {
    cplx f{}, g{};
    cplx scale_log{};
};

struct abcd_coefficients {
    cplx a{}, b{}, c{}, d{};
    cplx scale_log{}; // -i kappa d when scaled, else 0
};

struct recursion_result {
    determinant_pair fg;   // f_N, g_N
    determinant_pair bar;  // fbar_N, gbar_N
    cplx j1{};             // J1(kappa_1 rho_1), possibly scaled
    cplx j1_log{};
    cplx kappa1{};
};

struct spectral_sample {
    cplx alpha{};
    cplx F{};
    scaled_value det_a;
    scaled_value det_b;
};

enum class sheet { principal, reflected };

namespace detail {

inline bool is_scaled(const spectral_context& ctx, std::size_t i, scaling s)
{
    return s == scaling::full || (s == scaling::analytic && ctx.lossy(i));
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct j_pair {
    cplx j0, j1, log;
};

inline j_pair regular_pair(cplx u, bool scaled)
{
    j_pair p{};
    if (std::abs(u) <= bessel::series_radius) {
        const auto s = bessel::eval_small(u);
        p.j0 = s.j0;
        p.j1 = s.j1_over_z * u;
        if (scaled) {
            const cplx e = std::exp(I * u);
            p.j0 *= e;
            p.j1 *= e;
            p.log = -I * u;
        }
        return p;
    }
    const auto s = bessel::eval_scaled(u);
    if (scaled) return {s.j0, s.j1, -I * u};
    const cplx e = std::exp(-I * u);
    p.j0 = e * s.j0;
    p.j1 = e * s.j1;
    if (!finite(p.j0) || !finite(p.j1)) throw error(errc::overflow, "unscaled J out of range");
    return p;
}

struct exterior_functions {
    cplx kappa;
    cplx h0_1, h1_1, log1; // H^(1) values, unscaled = e^{log1} * stored
    cplx h0_2, h1_2, log2;
    // H^(1)_n(-u) up to the sign (-1)^n, continued with arg rotated by -pi:
    // H^(2) + 2 H^(1), stored on the H^(2) scale
    cplx r0, r1;
};

inline exterior_functions exterior(const spectral_context& ctx, cplx alpha, bool scaled)
{
    exterior_functions e{};
    e.kappa = transverse_wavenumber(ctx, ctx.n(), alpha);
    const cplx u = e.kappa * ctx.rho.back();
    const auto s = bessel::eval_scaled(u);
    if (scaled) {
        e.h0_1 = s.h0_1;
        e.h1_1 = s.h1_1;
        e.log1 = I * u;
        e.h0_2 = s.h0_2;
        e.h1_2 = s.h1_2;
        e.log2 = -I * u;
        const cplx e2 = std::exp(2.0 * I * u);
        e.r0 = e.h0_2 + 2.0 * e2 * e.h0_1;
        e.r1 = e.h1_2 + 2.0 * e2 * e.h1_1;
    } else {
        const auto p = bessel::unscale(s, u);
        e.h0_1 = p.h0_1;
        e.h1_1 = p.h1_1;
        e.h0_2 = p.h0_2;
        e.h1_2 = p.h1_2;
        e.r0 = e.h0_2 + 2.0 * e.h0_1;
        e.r1 = e.h1_2 + 2.0 * e.h1_1;
    }
    return e;
}

} // namespace detail

// Layer transfer coefficients for layer i (0-based, 1 <= i <= N-1).
inline abcd_coefficients abcd(const spectral_context& ctx, std::size_t i, cplx alpha, bool scaled)
{
    using constants::pi;
    cplx k = transverse_wavenumber(ctx, i, alpha);
    if (k.imag() < 0.0) k = -k;
    const double r0 = ctx.rho[i - 1];
    const double r1 = ctx.rho[i];
    const double d = r1 - r0;
    const cplx e = ctx.eps[i];
    const cplx ph = std::exp(I * k * d);
    abcd_coefficients c;
    if (std::abs(k * r1) <= bessel::series_radius) {
        // logarithms cancel analytically; finite at kappa = 0
        const auto s0 = bessel::eval_small(k * r0);
        const auto s1 = bessel::eval_small(k * r1);
        const double L = (2.0 / pi) * std::log(r0 / r1);
        const cplx k2 = k * k;
        c.a = I * e * (s1.j0 * s0.zc / r0 - k2 * r0 * s0.j1_over_z * s1.b + k2 * r0 * s1.j0 * s0.j1_over_z * L);
        c.b = I * k2 * (s0.j0 * s1.b - s1.j0 * s0.b - s0.j0 * s1.j0 * L);
        c.c = I * e * e
            * (s1.j1_over_z * s0.zc * (r1 / r0) - s0.j1_over_z * s1.zc * (r0 / r1)
               + k2 * r0 * r1 * s1.j1_over_z * s0.j1_over_z * L);
        c.d = I * e * (s0.j0 * s1.zc / r1 - k2 * r1 * s1.j1_over_z * s0.b - k2 * r1 * s0.j0 * s1.j1_over_z * L);
        if (scaled) {
            c.a *= ph;
            c.b *= ph;
            c.c *= ph;
            c.d *= ph;
            c.scale_log = -I * k * d;
        }
        return c;
    }
    const auto b0 = bessel::eval_scaled(k * r0);
    const auto b1 = bessel::eval_scaled(k * r1);
    const cplx ph2 = ph * ph;
    c.a = k * e * (b1.j0 * b0.h1_1 - ph2 * b1.h0_1 * b0.j1);
    c.b = k * k * (ph2 * b1.h0_1 * b0.j0 - b1.j0 * b0.h0_1);
    c.c = e * e * (b1.j1 * b0.h1_1 - ph2 * b1.h1_1 * b0.j1);
    c.d = k * e * (ph2 * b1.h1_1 * b0.j0 - b1.j1 * b0.h0_1);
    if (scaled) {
        c.scale_log = -I * k * d;
    } else {
        c.a /= ph;
        c.b /= ph;
        c.c /= ph;
        c.d /= ph;
        if (!detail::finite(c.a) || !detail::finite(c.b) || !detail::finite(c.c) || !detail::finite(c.d))
            throw error(errc::overflow, "unscaled layer coefficients out of range");
    }
    return c;
}

inline recursion_result recurse_determinants(const spectral_context& ctx, cplx alpha, scaling mode = scaling::full)
{
    recursion_result r;
    const cplx k1 = transverse_wavenumber(ctx, 0, alpha);
    const auto jp = detail::regular_pair(k1 * ctx.rho[0], detail::is_scaled(ctx, 0, mode));
    r.kappa1 = k1;
    r.j1 = jp.j1;
    r.j1_log = jp.log;
    r.fg = {-k1 * jp.j0, -ctx.eps[0] * jp.j1, jp.log};
    r.bar = {1.0, 0.0, 0.0};
    for (std::size_t i = 1; i < ctx.n(); ++i) {
        const auto c = abcd(ctx, i, alpha, detail::is_scaled(ctx, i, mode));
        const cplx f = c.a * r.fg.f + c.b * r.fg.g;
        const cplx g = c.c * r.fg.f + c.d * r.fg.g;
        const cplx fb = c.a * r.bar.f + c.b * r.bar.g;
        const cplx gb = c.c * r.bar.f + c.d * r.bar.g;
        r.fg = {f, g, r.fg.scale_log + c.scale_log};
        r.bar = {fb, gb, r.bar.scale_log + c.scale_log};
    }
    if (!detail::finite(r.fg.f) || !detail::finite(r.fg.g) || !detail::finite(r.bar.f) || !detail::finite(r.bar.g))
        throw error(errc::overflow, "auxiliary determinants left the floating-point range");
    return r;
}

// det A up to the carried exponential factor; zeros are preserved.
inline scaled_value det_dispersion(const spectral_context& ctx, cplx alpha, scaling mode = scaling::analytic)
{
    const auto r = recurse_determinants(ctx, alpha, mode);
    const bool sc = mode != scaling::none;
    const auto ex = detail::exterior(ctx, alpha, sc);
    const cplx x = ex.kappa * ex.h0_1;
    const cplx y = ctx.eps.back() * ex.h1_1;
    return {y * r.fg.f - x * r.fg.g, r.fg.scale_log + ex.log1};
}

inline scaled_value det_numerator(const spectral_context& ctx, cplx alpha, scaling mode = scaling::analytic)
{
    const auto r = recurse_determinants(ctx, alpha, mode);
    const bool sc = mode != scaling::none;
    const auto ex = detail::exterior(ctx, alpha, sc);
    const cplx x = ex.kappa * ex.h0_1;
    const cplx y = ctx.eps.back() * ex.h1_1;
    return {y * r.bar.f - x * r.bar.g, r.bar.scale_log + ex.log1};
}

// det A continued across the exterior cut from the side that holds the real axis,
// i.e. kappa_N -> kappa_N e^{-i pi}. The common sign of x and y is dropped.
inline scaled_value det_reflected(const spectral_context& ctx, cplx alpha, scaling mode = scaling::analytic)
{
    const auto r = recurse_determinants(ctx, alpha, mode);
    const auto ex = detail::exterior(ctx, alpha, mode != scaling::none);
    const cplx x = ex.kappa * ex.r0;
    const cplx y = ctx.eps.back() * ex.r1;
    return {y * r.fg.f - x * r.fg.g, r.fg.scale_log + ex.log2};
}

inline spectral_sample eval_F(const spectral_context& ctx, cplx alpha, cplx M = 1.0, scaling mode = scaling::full,
                              sheet sh = sheet::principal)
{
    spectral_sample s;
    s.alpha = alpha;
    const auto r = recurse_determinants(ctx, alpha, mode);
    const cplx pre = M * ctx.sigma1 * ctx.rho[0] * r.j1;
    const cplx kext = transverse_wavenumber(ctx, ctx.n(), alpha);
    if (kext == cplx(0.0, 0.0)) {
        // limit at the branch point: y dominates
        s.det_a = {r.fg.f, r.fg.scale_log};
        s.det_b = {r.bar.f, r.bar.scale_log};
    } else {
        const auto ex = detail::exterior(ctx, alpha, mode != scaling::none);
        const bool refl = sh == sheet::reflected;
        const cplx x = ex.kappa * (refl ? ex.r0 : ex.h0_1);
        const cplx y = ctx.eps.back() * (refl ? ex.r1 : ex.h1_1);
        const cplx lg = refl ? ex.log2 : ex.log1;
        s.det_a = {y * r.fg.f - x * r.fg.g, r.fg.scale_log + lg};
        s.det_b = {y * r.bar.f - x * r.bar.g, r.bar.scale_log + lg};
    }
    if (s.det_a.mantissa == cplx(0.0, 0.0))
        throw error(errc::pole_hit, "alpha coincides with a zero of det A");
    const cplx expo = r.j1_log + s.det_b.log_scale - s.det_a.log_scale;
    s.F = pre * (s.det_b.mantissa / s.det_a.mantissa) * std::exp(expo);
    if (!detail::finite(s.F)) throw error(errc::pole_hit, "F is not finite at this alpha");
    return s;
}

// Jump of F across the exterior cut, principal minus reflected sheet.
inline cplx eval_q(const spectral_context& ctx, cplx alpha, cplx M = 1.0)
{
    using constants::pi;
    const cplx ac = branch_point(ctx);
    if (alpha == ac) return 0.0;
    const cplx kext = transverse_wavenumber(ctx, ctx.n(), alpha);
    if (kext == cplx(0.0, 0.0)) return 0.0;
    const auto r = recurse_determinants(ctx, alpha, scaling::full);
    const auto ex = detail::exterior(ctx, alpha, true);
    const cplx ee = ctx.eps.back();
    const cplx d1 = ee * ex.h1_1 * r.fg.f - ex.kappa * ex.h0_1 * r.fg.g;
    const cplx d2 = ee * ex.r1 * r.fg.f - ex.kappa * ex.r0 * r.fg.g;
    if (d1 == cplx(0.0, 0.0) || d2 == cplx(0.0, 0.0)) throw error(errc::pole_hit, "q evaluated at a pole");
    const double rn = ctx.rho.back();
    const cplx num = r.bar.f * r.fg.g - r.fg.f * r.bar.g;
    const cplx expo = r.j1_log + r.bar.scale_log - r.fg.scale_log;
    const cplx q = M * ctx.sigma1 * ctx.rho[0] * r.j1 * (4.0 * I * ee / (pi * rn)) * num / (d1 * d2) * std::exp(expo);
    if (!detail::finite(q)) throw error(errc::pole_hit, "q is not finite at this alpha");
    return q;
}

struct branch_coefficients {
    cplx qprime_c; // q'(alpha_c)
    cplx a_log;    // coefficient A of the logarithmic singularity of q''
};

inline branch_coefficients q_branch_coefficients(const spectral_context& ctx, cplx M = 1.0)
{
    using constants::pi;
    const cplx ac = branch_point(ctx);
    const auto r = recurse_determinants(ctx, ac, scaling::full);
    const cplx ee = ctx.eps.back();
    const double rn = ctx.rho.back();
    const cplx ef = ee * r.fg.f;
    // compare with the g-term of det A at |kappa_e| ~ |alpha_c|, which carries kappa^2 rho_N
    const double gscale = std::abs(r.fg.g) * rn * std::abs(ctx.k2(ctx.n()));
    if (std::abs(ef) <= 1e-12 * (std::abs(ef) + gscale))
        throw error(errc::degenerate_at_cut, "f_N vanishes at the branch point");
    const cplx num = r.bar.f * r.fg.g - r.fg.f * r.bar.g;
    const cplx expo = r.j1_log + r.bar.scale_log - r.fg.scale_log;
    branch_coefficients b;
    b.qprime_c = I * 2.0 * pi * ac * M * ctx.sigma1 * ctx.rho[0] * rn * r.j1 * num / (ee * r.fg.f * r.fg.f)
               * std::exp(expo);
    b.a_log = -b.qprime_c * ((ef - 2.0 * r.fg.g / rn) / ef) * 2.0 * ac * rn * rn;
    return b;
}

} // namespace coaxdisp

#endif
