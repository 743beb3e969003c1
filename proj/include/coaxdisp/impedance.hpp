#ifndef COAXDISP_IMPEDANCE_HPP
#define COAXDISP_IMPEDANCE_HPP

#include "dispersion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace coaxdisp {

struct impedance_options {
    // a_i referenced to the outer radius of layer i and b_i to the inner one, so every
    // Bessel factor in the system is bounded even for layers many skin depths thick
    bool scaled = true;
    bool precondition = true;   // Jacobi column scaling
    double residual_tolerance = 1e-4;
};

// a[0] is a_1 and equals 1; a[i], b[i] belong to layer i (0-based), b[0] unused, b[N] exterior.
struct modal_coefficients {
    cplx alpha{};
    std::vector<cplx> a, b;
    bool scaled = true;
    double residual = 0.0;
};

struct impedance {
    cplx z{};
    cplx v_plus{}, i_plus{};
};

namespace detail {

// Bessel values of one layer at its inner and outer radius, already multiplied by the
// factors that relate them to the (possibly scaled) coefficients.
struct layer_bessel {
    cplx kappa{};
    cplx j0_in, j1_in, h0_in, h1_in;
    cplx j0_out, j1_out, h0_out, h1_out;
};

struct hankel_pair {
    cplx h0, h1;
};

inline hankel_pair hankel_at(cplx u, bool scaled)
{
    const auto s = bessel::eval_scaled(u);
    if (scaled) return {s.h0_1, s.h1_1};
    const auto p = bessel::unscale(s, u);
    if (!finite(p.h0_1) || !finite(p.h1_1)) throw error(errc::overflow, "unscaled H out of range");
    return {p.h0_1, p.h1_1};
}

inline layer_bessel layer_values(const spectral_context& ctx, std::size_t i, cplx alpha, bool scaled)
{
    layer_bessel v{};
    v.kappa = transverse_wavenumber(ctx, i, alpha);
    const std::size_t n = ctx.n();
    if (i < n) {
        const auto jo = regular_pair(v.kappa * ctx.rho[i], scaled);
        v.j0_out = jo.j0;
        v.j1_out = jo.j1;
    }
    if (i == 0) return v;
    const double r_in = ctx.rho[i - 1];
    const auto hi = hankel_at(v.kappa * r_in, scaled);
    if (i == n) {
        v.h0_in = hi.h0;
        v.h1_in = hi.h1;
        return v;
    }
    const auto ji = regular_pair(v.kappa * r_in, scaled);
    const auto ho = hankel_at(v.kappa * ctx.rho[i], scaled);
    v.h0_out = ho.h0;
    v.h1_out = ho.h1;
    // e^{i kappa d}, |.| <= 1
    const cplx decay = scaled ? std::exp(I * v.kappa * (ctx.rho[i] - r_in)) : cplx(1.0);
    v.j0_in = decay * ji.j0;
    v.j1_in = decay * ji.j1;
    v.h0_in = hi.h0;
    v.h1_in = hi.h1;
    v.h0_out = decay * v.h0_out;
    v.h1_out = decay * v.h1_out;
    return v;
}

inline std::vector<layer_bessel> all_layer_values(const spectral_context& ctx, cplx alpha, bool scaled)
{
    std::vector<layer_bessel> v;
    for (std::size_t i = 0; i <= ctx.n(); ++i) v.push_back(layer_values(ctx, i, alpha, scaled));
    return v;
}

inline Eigen::Index col_a(std::size_t i) { return 2 * static_cast<Eigen::Index>(i - 1); }
inline Eigen::Index col_b(std::size_t i) { return 2 * static_cast<Eigen::Index>(i - 1) + 1; }

} // namespace detail

struct coefficient_system {
    Eigen::MatrixXcd B;
    Eigen::VectorXcd b;
};

// Boundary conditions at alpha with a_1 = 1 moved to the right-hand side: 2N rows, 2N-1 unknowns
// ordered a_2, b_2, ..., a_N, b_N, b_{N+1}.
inline coefficient_system build_coefficient_system(const spectral_context& ctx, cplx alpha, bool scaled = true)
{
    const std::size_t n = ctx.n();
    const auto L = detail::all_layer_values(ctx, alpha, scaled);
    const Eigen::Index rows = 2 * static_cast<Eigen::Index>(n), cols = rows - 1;
    coefficient_system s{Eigen::MatrixXcd::Zero(rows, cols), Eigen::VectorXcd::Zero(rows)};
    const Eigen::Index ext = cols - 1;
    for (std::size_t k = 0; k < n; ++k) {
        const Eigen::Index r0 = 2 * static_cast<Eigen::Index>(k), r1 = r0 + 1;
        const auto& in = L[k];
        const auto& out = L[k + 1];
        const cplx ei = ctx.eps[k], eo = ctx.eps[k + 1];
        if (k == 0) {
            s.b(r0) = in.kappa * in.j0_out;
            s.b(r1) = ei * in.j1_out;
        } else {
            s.B(r0, detail::col_a(k)) = -in.kappa * in.j0_out;
            s.B(r0, detail::col_b(k)) = -in.kappa * in.h0_out;
            s.B(r1, detail::col_a(k)) = -ei * in.j1_out;
            s.B(r1, detail::col_b(k)) = -ei * in.h1_out;
        }
        if (k + 1 == n) {
            s.B(r0, ext) = out.kappa * out.h0_in;
            s.B(r1, ext) = eo * out.h1_in;
        } else {
            s.B(r0, detail::col_a(k + 1)) = out.kappa * out.j0_in;
            s.B(r0, detail::col_b(k + 1)) = out.kappa * out.h0_in;
            s.B(r1, detail::col_a(k + 1)) = eo * out.j1_in;
            s.B(r1, detail::col_b(k + 1)) = eo * out.h1_in;
        }
    }
    return s;
}

// Columns of B D^{-1/2}, D = diag(B^H B); returns D^{-1/2}.
inline Eigen::VectorXd jacobi_scaling(const Eigen::MatrixXcd& B)
{
    Eigen::VectorXd d(B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        const double nrm = B.col(j).norm();
        d(j) = nrm > 0.0 ? 1.0 / nrm : 1.0;
    }
    return d;
}

inline modal_coefficients solve_coefficients(const spectral_context& ctx, cplx alpha_p, const impedance_options& opt = {})
{
    const auto sys = build_coefficient_system(ctx, alpha_p, opt.scaled);
    Eigen::VectorXcd x;
    if (opt.precondition) {
        const Eigen::VectorXd dinv = jacobi_scaling(sys.B);
        const Eigen::MatrixXcd Bs = sys.B * dinv.asDiagonal();
        const Eigen::VectorXcd y = Bs.colPivHouseholderQr().solve(sys.b);
        x = dinv.asDiagonal() * y;
    } else {
        x = sys.B.colPivHouseholderQr().solve(sys.b);
    }
    modal_coefficients c;
    c.alpha = alpha_p;
    c.scaled = opt.scaled;
    c.residual = (sys.B * x - sys.b).norm() / sys.b.norm();
    if (!std::isfinite(c.residual) || c.residual > opt.residual_tolerance)
        throw error(errc::ill_conditioned, "coefficient residual " + std::to_string(c.residual));
    const std::size_t n = ctx.n();
    c.a.assign(n, cplx{});
    c.b.assign(n + 1, cplx{});
    c.a[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        c.a[i] = x(detail::col_a(i));
        c.b[i] = x(detail::col_b(i));
    }
    c.b[n] = x(x.size() - 1);
    return c;
}

// Index L-1 (0-based) of the layer whose outer radius is rho_L; 2 <= L <= N.
inline std::size_t voltage_layer(const spectral_context& ctx, double rho_L)
{
    for (std::size_t i = 1; i < ctx.n(); ++i)
        if (std::abs(ctx.rho[i] - rho_L) <= 1e-9 * ctx.rho[i]) return i;
    throw error(errc::bad_radius, "rho_L = " + std::to_string(rho_L) + " m is not an interior layer boundary");
}

// Integral of E_rho from rho_1 to rho_L at z = 0.
inline cplx voltage_wave(const spectral_context& ctx, const modal_coefficients& c, double rho_L)
{
    const std::size_t last = voltage_layer(ctx, rho_L);
    cplx s = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
        const auto v = detail::layer_values(ctx, i, c.alpha, c.scaled);
        s += (c.a[i] * (v.j0_out - v.j0_in) + c.b[i] * (v.h0_out - v.h0_in)) / v.kappa;
    }
    return I * c.alpha / ctx.k0 * s;
}

inline cplx current_wave(const spectral_context& ctx, const modal_coefficients& c)
{
    const auto v = detail::layer_values(ctx, 0, c.alpha, c.scaled);
    return 2.0 * constants::pi * ctx.sigma1 / ctx.k0 * c.a[0] * ctx.rho[0] * v.j1_out;
}

// Voltage across the insulation system of the reference cable.
inline constexpr double default_rho_L = 43.2e-3;

inline impedance characteristic_impedance(const spectral_context& ctx, cplx alpha_p, double rho_L = default_rho_L,
                                          const impedance_options& opt = {})
{
    const auto c = solve_coefficients(ctx, alpha_p, opt);
    impedance z;
    z.v_plus = voltage_wave(ctx, c, rho_L);
    z.i_plus = current_wave(ctx, c);
    z.z = z.v_plus / z.i_plus;
    return z;
}

} // namespace coaxdisp

#endif
