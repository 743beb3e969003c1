#ifndef COAXDISP_SPECTRAL_HPP
#define COAXDISP_SPECTRAL_HPP

#include "dispersion.hpp"
#include "modes.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace coaxdisp {

enum class contribution_kind { mode, branch_cut, branch_asymptotic, branch_upper_bound };

struct current_contribution {
    contribution_kind kind = contribution_kind::mode;
    cplx value{};
    double z = 0.0;
    double freq = 0.0;
    int mode_index = 0;
    double error_estimate = 0.0;
    cplx residue_value{}; // modes: 2 pi i Res e^{i alpha_p z} from the derivative of det A
};

// Vertical ray alpha = alpha_c + i t, 0 <= t <= truncation.
struct contour_b {
    cplx origin{};
    double truncation = 0.0;
    double tolerance = 1e-10;
};

inline contour_b make_contour_b(const spectral_context& ctx, double z, double tail = 40.0)
{
    return {branch_point(ctx), tail / z, 1e-10};
}

namespace detail {

// f'(a) by the trapezoid rule on a circle; spectrally accurate for analytic f.
template <class Fn>
cplx cauchy_derivative(Fn&& f, cplx a, double r, int order = 1, int n = 32)
{
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) {
        const cplx u = std::polar(1.0, 2.0 * constants::pi * k / n);
        s += f(a + r * u) / std::pow(u, order);
    }
    double fact = 1.0;
    for (int k = 2; k <= order; ++k) fact *= k;
    return s * fact / (double(n) * std::pow(r, order));
}

// oint F e^{i alpha z} over a square, composite Gauss-Legendre with panel doubling.
inline cplx square_integral(const spectral_context& ctx, cplx center, double half, double z, cplx M, double tol)
{
    const contour c = contour::square(center, half);
    const auto& r = quad::gauss_legendre(16);
    cplx prev{};
    for (int panels = 1; panels <= 64; panels *= 2) {
        cplx s = 0.0;
        for (std::size_t e = 0; e < 4; ++e) {
            const cplx a = c.vertices[e], b = c.vertices[(e + 1) % 4];
            for (int p = 0; p < panels; ++p) {
                const cplx pa = a + (b - a) * (double(p) / panels);
                const cplx pb = a + (b - a) * (double(p + 1) / panels);
                const cplx mid = 0.5 * (pa + pb), hw = 0.5 * (pb - pa);
                for (int k = 0; k < 16; ++k) {
                    const cplx al = mid + hw * r.x[k];
                    // factor e^{i center z} out so that large z does not lose the phase reference
                    s += r.w[k] * hw * eval_F(ctx, al, M).F * std::exp(I * (al - center) * z);
                }
            }
        }
        if (panels > 1 && std::abs(s - prev) <= tol * std::abs(s)) return s * std::exp(I * center * z);
        prev = s;
    }
    return prev * std::exp(I * center * z);
}

struct gk_estimate {
    cplx value{};
    double error = 0.0;
    double l1 = 0.0;
};

// One 31-point Kronrod panel with its embedded 15-point Gauss rule. Boost's own error
// estimate is unreliable for complex integrands, so the difference is formed here.
template <class Fn>
gk_estimate gk_panel(Fn& f, double a, double b)
{
    using kr = boost::math::quadrature::gauss_kronrod<double, 31>;
    using ga = boost::math::quadrature::gauss<double, 15>;
    const auto& x = kr::abscissa();
    const auto& wk = kr::weights();
    const auto& wg = ga::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const cplx f0 = f(c);
    cplx k = wk[0] * f0, g = wg[0] * f0;
    double l1 = wk[0] * std::abs(f0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const cplx s = f(c - h * x[i]) + f(c + h * x[i]);
        k += wk[i] * s;
        l1 += wk[i] * std::abs(s);
        if (i % 2 == 0) g += wg[i / 2] * s;
    }
    return {h * k, std::abs(h * (k - g)), std::abs(h) * l1};
}

struct gk_result {
    cplx value{};
    double error = 0.0;
    double l1 = 0.0;
    bool converged = false;
};

// Globally adaptive: always split the panel with the largest error. Rounding noise far
// out on a decaying integrand then never drives refinement, since its absolute error is tiny.
template <class Fn>
gk_result gk_integrate(Fn& f, const std::vector<double>& breaks, double rel_tol, int max_panels = 20000)
{
    struct panel {
        double a, b;
        gk_estimate e;
        bool operator<(const panel& o) const { return e.error < o.e.error; }
    };
    std::priority_queue<panel> heap;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
        if (breaks[k + 1] > breaks[k]) heap.push({breaks[k], breaks[k + 1], gk_panel(f, breaks[k], breaks[k + 1])});
    const auto totals = [&heap] {
        auto copy = heap;
        gk_result r;
        while (!copy.empty()) {
            r.value += copy.top().e.value;
            r.error += copy.top().e.error;
            r.l1 += copy.top().e.l1;
            copy.pop();
        }
        return r;
    };
    gk_result r = totals();
    double err = r.error, l1 = r.l1;
    while (!heap.empty() && err > rel_tol * l1 && int(heap.size()) < max_panels) {
        const panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        const panel lo{p.a, m, gk_panel(f, p.a, m)}, hi{m, p.b, gk_panel(f, m, p.b)};
        err += lo.e.error + hi.e.error - p.e.error;
        l1 += lo.e.l1 + hi.e.l1 - p.e.l1;
        heap.push(lo);
        heap.push(hi);
    }
    r = totals();
    r.converged = r.error <= rel_tol * r.l1 * 1.0000001;
    return r;
}

} // namespace detail

// 2 pi i Res F at the pole, from the derivative of the scaled det A.
inline cplx residue_current(const spectral_context& ctx, const mode_solution& mode, cplx M = 1.0)
{
    const cplx ap = mode.alpha;
    const double r = 0.25 * std::min(mode.path.distance_to_boundary(ap), std::abs(ap - branch_point(ctx)));
    const auto det = [&](cplx a) { return det_dispersion(ctx, a, scaling::full); };
    const auto d0 = det(ap);
    // derivative of the mantissa with its scale referenced to the pole
    const auto mant = [&](cplx a) {
        const auto d = det(a);
        return d.mantissa * std::exp(d.log_scale - d0.log_scale);
    };
    const cplx dd = detail::cauchy_derivative(mant, ap, r);
    const auto rr = recurse_determinants(ctx, ap, scaling::full);
    const auto ex = detail::exterior(ctx, ap, true);
    const cplx x = ex.kappa * ex.h0_1;
    const cplx y = ctx.eps.back() * ex.h1_1;
    const cplx num = y * rr.bar.f - x * rr.bar.g;
    const cplx num_log = rr.bar.scale_log + ex.log1;
    const cplx res = M * ctx.sigma1 * ctx.rho[0] * rr.j1 * num / dd * std::exp(rr.j1_log + num_log - d0.log_scale);
    return 2.0 * constants::pi * I * res;
}

// I_p(z) = oint_{C_p} F e^{i alpha z} d alpha.
inline current_contribution modal_current(const spectral_context& ctx, const mode_solution& mode, cplx M, double z,
                                          int mode_index = 0, double leak_tol = 1e-6)
{
    const cplx ap = mode.alpha;
    double half = 0.5 * std::min(mode.path.distance_to_boundary(ap), std::abs(ap - branch_point(ctx)));
    half = std::min(half, 0.1 * std::abs(ap));
    if (z > 0.0) half = std::min(half, 2.0 / z);
    const cplx i1 = detail::square_integral(ctx, ap, half, z, M, 1e-11);
    const cplx i2 = detail::square_integral(ctx, ap, 0.5 * half, z, M, 1e-11);
    const double leak = std::abs(i1 - i2) / std::abs(i2);
    if (!(leak <= leak_tol)) throw error(errc::contour_leak, "modal contour integral depends on contour size");
    current_contribution c;
    c.kind = contribution_kind::mode;
    c.value = i2;
    c.z = z;
    c.freq = ctx.freq;
    c.mode_index = mode_index;
    c.error_estimate = leak;
    c.residue_value = residue_current(ctx, mode, M) * std::exp(I * ap * z);
    return c;
}

// Zeros of det A and of its reflected-sheet continuation between the cut and the ray.
inline int count_strip_zeros(const spectral_context& ctx, double height)
{
    const cplx ac = branch_point(ctx);
    const double x0 = 0.02 * ac.real(), x1 = ac.real() * (1.0 - 1e-3);
    const double hyper = x0 > 0.0 ? (ac * ac).imag() / (2.0 * x0) : 0.0;
    const double y0 = std::max(hyper, 0.0) + 1e-3 * std::abs(ac);
    if (!(height > y0)) return 0;
    const contour c = contour::rectangle(cplx(x0, y0), cplx(x1, height));
    search_options opt;
    const auto d1 = [&](cplx a) { return det_dispersion(ctx, a, scaling::analytic).mantissa; };
    const auto d2 = [&](cplx a) { return det_reflected(ctx, a, scaling::analytic).mantissa; };
    return count_zeros_of(d1, c, opt).winding + count_zeros_of(d2, c, opt).winding;
}

inline current_contribution branch_current(const spectral_context& ctx, cplx M, double z, const contour_b& b,
                                           bool check_strip = false)
{
    if (!(z > 0.0)) throw error(errc::config, "branch current needs z > 0");
    if (check_strip && count_strip_zeros(ctx, 10.0 * std::abs(b.origin)) != 0)
        throw error(errc::pole_between_contours, "zeros between the cut and the vertical contour");
    const cplx ac = b.origin;
    const auto f = [&](double t) { return eval_q(ctx, ac + I * t, M) * std::exp(-t * z); };
    // log-graded panels down to the linear regime of q near alpha_c
    std::vector<double> brk{b.truncation};
    const double tmin = 1e-6 * std::min(std::abs(ac), 1.0 / z);
    while (brk.back() > tmin) brk.push_back(brk.back() / 4.0);
    brk.push_back(0.0);
    std::reverse(brk.begin(), brk.end());
    const auto r = detail::gk_integrate(f, brk, b.tolerance);
    const cplx s = r.value;
    const double err = r.error;
    current_contribution c;
    c.kind = contribution_kind::branch_cut;
    c.value = I * std::exp(I * ac * z) * s;
    c.z = z;
    c.freq = ctx.freq;
    c.error_estimate = err;
    return c;
}

inline current_contribution branch_current(const spectral_context& ctx, cplx M, double z)
{
    return branch_current(ctx, M, z, make_contour_b(ctx, z));
}

inline current_contribution branch_asymptotic(const spectral_context& ctx, cplx M, double z)
{
    const auto bc = q_branch_coefficients(ctx, M);
    const cplx ac = branch_point(ctx);
    current_contribution c;
    c.kind = contribution_kind::branch_asymptotic;
    c.value = std::exp(I * ac * z) * (-bc.qprime_c / (z * z) - I * bc.a_log * (-constants::gamma - std::log(z)) / (z * z * z));
    c.z = z;
    c.freq = ctx.freq;
    return c;
}

// 1.5 max |q'' - A ln(-i(alpha - alpha_c))| over log-spaced samples on the ray.
inline double rest_term_bound(const spectral_context& ctx, cplx M, double z_min, int samples = 64)
{
    const cplx ac = branch_point(ctx);
    const auto bc = q_branch_coefficients(ctx, M);
    const double t0 = 1e-6 * std::abs(ac), t1 = 50.0 / z_min;
    double mx = 0.0;
    const auto q = [&](cplx a) { return eval_q(ctx, a, M); };
    for (int k = 0; k < samples; ++k) {
        const double t = t0 * std::pow(t1 / t0, double(k) / (samples - 1));
        const cplx a = ac + I * t;
        const cplx q2 = detail::cauchy_derivative(q, a, 0.25 * t, 2, 48);
        const cplx r = q2 - bc.a_log * std::log(-I * (a - ac));
        mx = std::max(mx, std::abs(r));
    }
    return 1.5 * mx;
}

inline current_contribution branch_upper_bound(const spectral_context& ctx, cplx M, double m_rest, double z)
{
    const auto as = branch_asymptotic(ctx, M, z);
    current_contribution c;
    c.kind = contribution_kind::branch_upper_bound;
    c.value = std::abs(as.value) + m_rest * std::exp(-branch_point(ctx).imag() * z) / (z * z * z);
    c.z = z;
    c.freq = ctx.freq;
    return c;
}

struct calibration {
    cplx M{};
    cplx denominator{};
    double sensitivity = 0.0; // max relative change of the denominator over z in [0.1, 10] m
    bool flagged = false;
};

// Sum of residue currents and branch integral for M = 1.
inline cplx spectral_sum(const spectral_context& ctx, const std::vector<mode_solution>& modes, double z)
{
    cplx s = branch_current(ctx, 1.0, z).value;
    for (const auto& m : modes) s += residue_current(ctx, m, 1.0) * std::exp(I * m.alpha * z);
    return s;
}

inline calibration calibrate_M(const spectral_context& ctx, const std::vector<mode_solution>& modes, cplx i_in,
                               double z_cal = 1.0, bool check_sensitivity = true)
{
    calibration c;
    c.denominator = spectral_sum(ctx, modes, z_cal);
    if (!(std::abs(c.denominator) > 1e-300)) throw error(errc::degenerate_excitation, "calibration denominator vanishes");
    c.M = i_in / c.denominator;
    if (check_sensitivity) {
        for (double z : {0.1, 10.0}) {
            const cplx d = spectral_sum(ctx, modes, z);
            c.sensitivity = std::max(c.sensitivity, std::abs(d - c.denominator) / std::abs(c.denominator));
        }
        c.flagged = c.sensitivity >= 1e-3;
    }
    return c;
}

} // namespace coaxdisp

#endif
