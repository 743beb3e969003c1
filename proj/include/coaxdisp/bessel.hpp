#ifndef COAXDISP_BESSEL_HPP
#define COAXDISP_BESSEL_HPP

#include "constants.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

#include <array>
#include <cmath>
#include <complex>

namespace coaxdisp::bessel {

// Scaled values: Jm~ = e^{iz} Jm, Hm1~ = e^{-iz} Hm1, Hm2~ = e^{iz} Hm2.
struct scaled {
    cplx j0, j1, h0_1, h1_1, h0_2, h1_2;
};

struct plain {
    cplx j0, j1, h0_1, h1_1, h0_2, h1_2;
};

// Y0 = (2/pi) ln(z/2) J0 + b,  Y1 = (2/pi) ln(z/2) J1 + c
struct regular_parts {
    cplx b, c;
};

inline constexpr double series_radius = 2.0;
inline constexpr double asymptotic_radius = 25.0;

namespace detail {

using constants::pi;

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline void require_finite(cplx z)
{
    if (!finite(z)) throw error(errc::non_finite, "Bessel argument is not finite");
}

struct series_out {
    cplx j0;
    cplx j1_over_z; // J1(z)/z, entire
    cplx b;         // regular part of Y0
    cplx zc;        // z * C(z), entire
};

// Power series of J0, J1/z, B and zC. Exact near z = 0; used up to |z| ~ 8.
inline series_out series(cplx z)
{
    const cplx w = -0.25 * z * z; // (-1)^k (z^2/4)^k = w^k
    const double g = constants::gamma;
    series_out s{};

    cplx t0 = 1.0; // w^k/(k!)^2
    cplx t1 = 1.0; // w^k/(k!(k+1)!)
    double hk = 0.0;
    cplx sum_j0 = 0.0, sum_j1 = 0.0, sum_b = 0.0, sum_c = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double hk1 = hk + 1.0 / (k + 1);
        sum_j0 += t0;
        sum_j1 += t1;
        sum_b += hk * t0;
        sum_c += (hk + hk1 - 2.0 * g) * t1;
        const double mag = std::abs(t0);
        if (k > 2 && mag < 1e-18 * (std::abs(sum_j0) + std::abs(sum_b)) && std::abs(t1) < 1e-18 * std::abs(sum_c))
            break;
        t0 *= w / double((k + 1) * (k + 1));
        t1 *= w / double((k + 1) * (k + 2));
        hk = hk1;
    }
    s.j0 = sum_j0;
    s.j1_over_z = 0.5 * sum_j1;
    // B = (2/pi)[g J0 - sum_{k>=1} H_k w^k/(k!)^2]
    s.b = (2.0 / pi) * (g * sum_j0 - sum_b);
    // zC = -2/pi - (z^2/(2 pi)) sum (H_k + H_{k+1} - 2g) w^k/(k!(k+1)!)
    s.zc = -2.0 / pi - (z * z / (2.0 * pi)) * sum_c;
    return s;
}

inline cplx log_half(cplx z) { return std::log(0.5 * z); }

inline scaled from_series(cplx z)
{
    const series_out s = series(z);
    const cplx j0 = s.j0;
    const cplx j1 = s.j1_over_z * z;
    const cplx l = (2.0 / pi) * log_half(z);
    const cplx y0 = l * j0 + s.b;
    const cplx y1 = l * j1 + s.zc / z;
    const cplx ep = std::exp(I * z);
    const cplx em = std::exp(-I * z);
    scaled r;
    r.j0 = ep * j0;
    r.j1 = ep * j1;
    r.h0_1 = em * (j0 + I * y0);
    r.h1_1 = em * (j1 + I * y1);
    r.h0_2 = ep * (j0 - I * y0);
    r.h1_2 = ep * (j1 - I * y1);
    return r;
}

struct laguerre_rules {
    quad::rule order0;
    quad::rule order1;
};

inline const laguerre_rules& laguerre()
{
    static const laguerre_rules r{quad::make_gauss_laguerre(32, -0.5), quad::make_gauss_laguerre(32, 0.5)};
    return r;
}

// e^{-iz} H^(1)_{0,1}(z) from the Laplace-type integral, Im z >= 0, |z| >= 2.
inline std::array<cplx, 2> laguerre_h1(cplx z)
{
    const auto& r = laguerre();
    const cplx pre = std::sqrt(2.0 / (pi * z));
    cplx s0 = 0.0, s1 = 0.0;
    const cplx inv = I / (2.0 * z);
    for (std::size_t k = 0; k < r.order0.x.size(); ++k) s0 += r.order0.w[k] / std::sqrt(1.0 + inv * r.order0.x[k]);
    for (std::size_t k = 0; k < r.order1.x.size(); ++k) s1 += r.order1.w[k] * std::sqrt(1.0 + inv * r.order1.x[k]);
    const double sqpi = std::sqrt(pi);
    return {pre * std::polar(1.0, -0.25 * pi) * s0 / sqpi, pre * std::polar(1.0, -0.75 * pi) * s1 * (2.0 / sqpi)};
}

// e^{iz} J_{0,1}(z) by the periodic trapezoid rule on the Bessel integral.
inline std::array<cplx, 2> trapezoid_j(cplx z)
{
    const int m = static_cast<int>(std::abs(z)) + 40;
    cplx s0 = 0.0, s1 = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * pi * k / m;
        const cplx e = std::exp(I * z * (1.0 + std::sin(t)));
        s0 += e;
        s1 += e * std::polar(1.0, -t);
    }
    return {s0 / double(m), s1 / double(m)};
}

// Hankel expansions, scaled; {H0(1), H1(1), H0(2), H1(2)}.
inline std::array<cplx, 4> asymptotic_h(cplx z)
{
    const cplx pre = std::sqrt(2.0 / (pi * z));
    std::array<cplx, 4> out;
    for (int nu = 0; nu <= 1; ++nu) {
        const double mu = 4.0 * nu * nu;
        cplx sp = 1.0, sm = 1.0;
        cplx tp = 1.0, tm = 1.0;
        double prev = 1.0;
        for (int k = 1; k < 80; ++k) {
            const double f = (mu - double((2 * k - 1) * (2 * k - 1))) / (8.0 * k);
            tp *= f * I / z;
            tm *= -f * I / z;
            const double mag = std::abs(tp);
            if (mag > prev) break;
            sp += tp;
            sm += tm;
            prev = mag;
            if (mag < 1e-17) break;
        }
        const double ph = 0.5 * pi * nu + 0.25 * pi;
        out[nu] = pre * std::polar(1.0, -ph) * sp;
        out[2 + nu] = pre * std::polar(1.0, ph) * sm;
    }
    return out;
}

// Im z >= 0 (arg z in [0, pi]).
inline scaled eval_upper(cplx z)
{
    const double r = std::abs(z);
    if (r <= series_radius) return from_series(z);
    scaled s;
    const cplx e2 = std::exp(2.0 * I * z);
    if (r < asymptotic_radius) {
        const auto h = laguerre_h1(z);
        const auto j = trapezoid_j(z);
        s.j0 = j[0];
        s.j1 = j[1];
        s.h0_1 = h[0];
        s.h1_1 = h[1];
    } else if (z.real() >= 0.0) {
        const auto h = asymptotic_h(z);
        s.h0_1 = h[0];
        s.h1_1 = h[1];
        s.h0_2 = h[2];
        s.h1_2 = h[3];
        s.j0 = 0.5 * (e2 * s.h0_1 + s.h0_2);
        s.j1 = 0.5 * (e2 * s.h1_1 + s.h1_2);
        return s;
    } else {
        // Left quadrant: H2 expansion is not valid near arg = pi; reflect J.
        const auto h = asymptotic_h(z);
        const auto hw = asymptotic_h(-std::conj(z));
        const cplx w = -std::conj(z);
        const cplx e2w = std::exp(2.0 * I * w);
        const cplx jw0 = 0.5 * (e2w * hw[0] + hw[2]);
        const cplx jw1 = 0.5 * (e2w * hw[1] + hw[3]);
        s.j0 = std::conj(jw0);
        s.j1 = -std::conj(jw1);
        s.h0_1 = h[0];
        s.h1_1 = h[1];
    }
    s.h0_2 = 2.0 * s.j0 - e2 * s.h0_1;
    s.h1_2 = 2.0 * s.j1 - e2 * s.h1_1;
    return s;
}

} // namespace detail

inline scaled eval_scaled(cplx zeta)
{
    detail::require_finite(zeta);
    if (zeta == cplx(0.0, 0.0)) throw error(errc::pole_at_zero, "Hankel functions are singular at zero");
    if (zeta.imag() >= 0.0) return detail::eval_upper(zeta);
    // Schwarz reflection into the upper half-plane.
    const scaled u = detail::eval_upper(std::conj(zeta));
    const cplx e2 = std::exp(2.0 * I * zeta);
    scaled s;
    s.j0 = e2 * std::conj(u.j0);
    s.j1 = e2 * std::conj(u.j1);
    s.h0_1 = std::conj(u.h0_2);
    s.h1_1 = std::conj(u.h1_2);
    s.h0_2 = std::conj(u.h0_1);
    s.h1_2 = std::conj(u.h1_1);
    if (!detail::finite(s.j0) || !detail::finite(s.j1))
        throw error(errc::overflow, "scaled J exceeds floating-point range below the real axis");
    return s;
}

inline plain unscale(const scaled& s, cplx zeta)
{
    const cplx ep = std::exp(I * zeta);
    const cplx em = std::exp(-I * zeta);
    plain p{em * s.j0, em * s.j1, ep * s.h0_1, ep * s.h1_1, em * s.h0_2, em * s.h1_2};
    for (cplx v : {p.j0, p.j1, p.h0_1, p.h1_1, p.h0_2, p.h1_2})
        if (!detail::finite(v)) throw error(errc::overflow, "unscaled Bessel value not representable");
    return p;
}

inline plain eval(cplx zeta) { return unscale(eval_scaled(zeta), zeta); }

// Entire helpers used by the layer coefficients near zero argument.
struct small_arg {
    cplx j0, j1_over_z, b, zc;
};

inline small_arg eval_small(cplx zeta)
{
    detail::require_finite(zeta);
    const auto s = detail::series(zeta);
    return {s.j0, s.j1_over_z, s.b, s.zc};
}

inline regular_parts neumann_regular_parts(cplx zeta)
{
    detail::require_finite(zeta);
    if (zeta == cplx(0.0, 0.0)) throw error(errc::pole_at_zero, "C(zeta) has a pole at zero");
    if (std::abs(zeta) <= 8.0) {
        const auto s = detail::series(zeta);
        return {s.b, s.zc / zeta};
    }
    const plain p = eval(zeta);
    const cplx l = (2.0 / constants::pi) * detail::log_half(zeta);
    const cplx y0 = (p.h0_1 - p.h0_2) / (2.0 * I);
    const cplx y1 = (p.h1_1 - p.h1_2) / (2.0 * I);
    return {y0 - l * p.j0, y1 - l * p.j1};
}

inline cplx wronskian_defect(cplx zeta)
{
    detail::require_finite(zeta);
    if (zeta == cplx(0.0, 0.0)) throw error(errc::pole_at_zero, "Wronskian undefined at zero");
    const scaled s = eval_scaled(zeta);
    return s.h0_2 * s.h1_1 - s.h0_1 * s.h1_2 + 4.0 * I / (constants::pi * zeta);
}

} // namespace coaxdisp::bessel

#endif
