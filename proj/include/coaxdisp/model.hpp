#ifndef COAXDISP_MODEL_HPP
#define COAXDISP_MODEL_HPP

#include "constants.hpp"
#include "errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace coaxdisp {

struct layer {
    std::string name;
    double radius = 0.0; // outer radius in m; ignored for the exterior
    double eps_r = 1.0;
    double sigma = 0.0;  // S/m
    double mu_r = 1.0;
    bool low_eps_ok = false; // permit eps_r < 1
};

struct layer_stack {
    std::vector<layer> layers; // innermost first
    layer exterior;

    std::size_t size() const { return layers.size(); }

    void validate() const
    {
        if (layers.empty()) throw error(errc::invalid_model, "at least one finite layer is required");
        if (!(layers.front().sigma > 0.0))
            throw error(errc::invalid_model, "innermost layer must be a conductor (sigma > 0)");
        double prev = 0.0;
        auto check_material = [](const layer& l) {
            if (!(l.sigma >= 0.0) || !std::isfinite(l.sigma))
                throw error(errc::invalid_model, "layer '" + l.name + "': sigma must be >= 0");
            if (!(l.mu_r > 0.0) || !std::isfinite(l.mu_r))
                throw error(errc::invalid_model, "layer '" + l.name + "': mu_r must be > 0");
            if (!(l.eps_r > 0.0) || !std::isfinite(l.eps_r) || (l.eps_r < 1.0 && !l.low_eps_ok))
                throw error(errc::invalid_model, "layer '" + l.name + "': eps_r must be >= 1");
        };
        for (const auto& l : layers) {
            check_material(l);
            if (!(l.radius > prev) || !std::isfinite(l.radius))
                throw error(errc::invalid_model, "layer '" + l.name + "': radii must be strictly increasing");
            prev = l.radius;
        }
        check_material(exterior);
    }
};

// The submarine power cable of the reference measurements; radii in m.
inline layer_stack reference_cable()
{
    layer_stack s;
    auto add = [&](const char* name, double rho_mm, double eps_r, double sigma, double mu_r = 1.0) {
        s.layers.push_back(layer{name, rho_mm * 1e-3, eps_r, sigma, mu_r, false});
    };
    add("conductor", 24.3, 1.0, 4.81e7);
    add("semiconductor", 24.5, 3.0, 1.0);
    add("semiconductor", 26.1, 1000.0, 1.0);
    add("insulation", 42.0, 2.3, 0.0);
    add("semiconductor", 43.2, 1000.0, 1.0);
    add("semiconductor", 43.9, 3.0, 1.0);
    add("lead sheath", 46.9, 1.0, 4.43e6);
    add("polyethylene", 49.3, 3.0, 0.0);
    add("polyethylene", 49.5, 3.0, 0.0);
    add("armour", 54.5, 1.4, 4.15e6, 40.0);
    add("polypropylene", 58.5, 3.0, 0.0);
    s.exterior = layer{"exterior", 0.0, 1.0, 0.0, 1.0, false};
    return s;
}

// Per-frequency quantities; index 0..N-1 are the finite layers, index N the exterior.
struct spectral_context {
    double freq = 0.0;
    double omega = 0.0;
    double k0 = 0.0;
    std::vector<cplx> eps;
    std::vector<double> mu;
    std::vector<double> rho; // N outer radii
    double sigma1 = 0.0;

    spectral_context() = default;

    spectral_context(const layer_stack& stack, double f)
    {
        stack.validate();
        if (!(f > 0.0) || !std::isfinite(f)) throw error(errc::invalid_model, "frequency must be positive");
        freq = f;
        omega = 2.0 * constants::pi * f;
        k0 = omega / constants::c0;
        auto add = [&](const layer& l) {
            eps.push_back(cplx(l.eps_r, l.sigma / (omega * constants::eps0)));
            mu.push_back(l.mu_r);
        };
        for (const auto& l : stack.layers) {
            add(l);
            rho.push_back(l.radius);
        }
        add(stack.exterior);
        sigma1 = stack.layers.front().sigma;
    }

    std::size_t n() const { return rho.size(); }

    // k0^2 mu eps
    cplx k2(std::size_t i) const { return k0 * k0 * mu[i] * eps[i]; }

    bool lossy(std::size_t i) const { return eps[i].imag() > 0.0; }
};

// kappa = i sqrt(alpha^2 - k0^2 mu eps), principal root, so 0 < arg kappa <= pi.
// Exactly on the cut (radicand real negative) the outgoing value, real positive, is returned.
inline cplx transverse_wavenumber(const spectral_context& ctx, std::size_t i, cplx alpha)
{
    const cplx w = alpha * alpha - ctx.k2(i);
    if (w.imag() == 0.0 && w.real() < 0.0) return cplx(std::sqrt(-w.real()), 0.0);
    return I * std::sqrt(w);
}

inline cplx branch_point(const spectral_context& ctx)
{
    const std::size_t e = ctx.n();
    return ctx.k0 * std::sqrt(ctx.mu[e] * ctx.eps[e]);
}

} // namespace coaxdisp

#endif
