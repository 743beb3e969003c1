#ifndef COAXDISP_MODES_HPP
#define COAXDISP_MODES_HPP

#include "dispersion.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace coaxdisp {

// Closed polygon, counterclockwise.
struct contour {
    std::vector<cplx> vertices;

    static contour rectangle(cplx lo, cplx hi)
    {
        return {{lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag())}};
    }
    static contour square(cplx center, double half)
    {
        return rectangle(center - cplx(half, half), center + cplx(half, half));
    }
    cplx lo() const
    {
        double x = vertices[0].real(), y = vertices[0].imag();
        for (auto v : vertices) x = std::min(x, v.real()), y = std::min(y, v.imag());
        return {x, y};
    }
    cplx hi() const
    {
        double x = vertices[0].real(), y = vertices[0].imag();
        for (auto v : vertices) x = std::max(x, v.real()), y = std::max(y, v.imag());
        return {x, y};
    }
    double diameter() const { return std::abs(hi() - lo()); }
    bool contains(cplx z) const
    {
        bool in = false;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const cplx a = vertices[i], b = vertices[j];
            if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
                const double x = a.real() + (z.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
                if (z.real() < x) in = !in;
            }
        }
        return in;
    }
    double distance_to_boundary(cplx z) const
    {
        double d = INFINITY;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const cplx a = vertices[i], b = vertices[(i + 1) % n];
            const cplx ab = b - a;
            double t = std::real(std::conj(ab) * (z - a)) / std::norm(ab);
            t = std::clamp(t, 0.0, 1.0);
            d = std::min(d, std::abs(z - (a + t * ab)));
        }
        return d;
    }
};

struct search_options {
    double min_ratio = 1e-12;          // min|det|/max|det| along a path before it counts as too close
    double integer_tolerance = 0.01;
    int max_depth = 40;
    double residual_tolerance = 1e-6;
    double ratio_tolerance = 1e-11;
    double min_cell_fraction = 1e-4;   // bisection floor relative to the region size
};

struct winding_result {
    int winding = 0;
    double raw = 0.0;
    double min_abs = 0.0;
    double max_abs = 0.0;
};

namespace detail {

template <class Det>
struct phase_walker {
    Det& det;
    const search_options& opt;
    double min_abs = INFINITY;
    double max_abs = 0.0;

    cplx eval(cplx z)
    {
        const cplx v = det(z);
        const double a = std::abs(v);
        if (!std::isfinite(a)) throw error(errc::non_finite, "dispersion function not finite on contour");
        min_abs = std::min(min_abs, a);
        max_abs = std::max(max_abs, a);
        return v;
    }

    double walk(cplx a, cplx fa, cplx b, cplx fb, int depth)
    {
        const cplx m = 0.5 * (a + b);
        const cplx fm = eval(m);
        const double p1 = std::arg(fm / fa);
        const double p2 = std::arg(fb / fm);
        const double p = std::arg(fb / fa);
        constexpr double lim = constants::pi / 6;
        if (std::abs(p1) < lim && std::abs(p2) < lim && std::abs(p1 + p2 - p) < 1e-9) return p1 + p2;
        if (depth >= opt.max_depth)
            throw error(errc::contour_too_close, "phase of det A unresolved along contour (zero on path?)");
        return walk(a, fa, m, fm, depth + 1) + walk(m, fm, b, fb, depth + 1);
    }
};

} // namespace detail

// Argument-principle count for any analytic callable along a polygon.
template <class Det>
winding_result count_zeros_of(Det&& det, const contour& c, const search_options& opt = {})
{
    detail::phase_walker<Det> w{det, opt};
    const std::size_t n = c.vertices.size();
    constexpr int pieces = 16;
    double total = 0.0;
    std::vector<cplx> pts;
    for (std::size_t e = 0; e < n; ++e) {
        const cplx a = c.vertices[e], b = c.vertices[(e + 1) % n];
        for (int k = 0; k < pieces; ++k) pts.push_back(a + (b - a) * (double(k) / pieces));
    }
    std::vector<cplx> vals(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = w.eval(pts[k]);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::size_t k1 = (k + 1) % pts.size();
        total += w.walk(pts[k], vals[k], pts[k1], vals[k1], 0);
    }
    winding_result r;
    r.raw = total / (2.0 * constants::pi);
    r.winding = static_cast<int>(std::lround(r.raw));
    r.min_abs = w.min_abs;
    r.max_abs = w.max_abs;
    if (std::abs(r.raw - r.winding) > opt.integer_tolerance)
        throw error(errc::contour_too_close, "winding number is not an integer");
    if (r.min_abs < opt.min_ratio * r.max_abs)
        throw error(errc::contour_too_close, "contour passes too close to a zero of det A");
    return r;
}

// Contour ratio  (oint alpha/det) / (oint 1/det)  with composite Gauss-Legendre per edge.
template <class Det>
cplx contour_ratio(Det&& det, const contour& c, double tol = 1e-12, bool* converged = nullptr)
{
    const std::size_t n = c.vertices.size();
    const cplx center = 0.5 * (c.lo() + c.hi());
    const auto& r = quad::gauss_legendre(16);
    cplx prev{};
    for (int panels = 1; panels <= 256; panels *= 2) {
        cplx t0 = 0.0, t1 = 0.0;
        for (std::size_t e = 0; e < n; ++e) {
            const cplx a = c.vertices[e], b = c.vertices[(e + 1) % n];
            for (int p = 0; p < panels; ++p) {
                const cplx pa = a + (b - a) * (double(p) / panels);
                const cplx pb = a + (b - a) * (double(p + 1) / panels);
                const cplx mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
                for (int k = 0; k < 16; ++k) {
                    const cplx z = mid + half * r.x[k];
                    const cplx inv = 1.0 / det(z);
                    t0 += r.w[k] * half * inv;
                    t1 += r.w[k] * half * (z - center) * inv;
                }
            }
        }
        const cplx est = center + t1 / t0;
        if (panels > 1 && std::abs(est - prev) <= tol * c.diameter()) {
            if (converged) *converged = true;
            return est;
        }
        prev = est;
    }
    if (converged) {
        *converged = false;
        return prev;
    }
    throw error(errc::no_convergence, "contour ratio did not converge");
}

struct zero_solution {
    cplx alpha{};
    contour path;
    int winding = 0;
    double residual = 0.0;
};

// Locate the single simple zero inside c.
template <class Det>
zero_solution locate_zero_of(Det&& det, const contour& c, const search_options& opt = {})
{
    const auto w = count_zeros_of(det, c, opt);
    if (w.winding != 1) throw error(errc::not_simple_zero, "contour encloses " + std::to_string(w.winding) + " zeros");
    // a coarse first estimate is enough; edges near a branch point converge only algebraically
    bool ok = false;
    cplx z = contour_ratio(det, c, 1e-8, &ok);
    if (!c.contains(z)) throw error(errc::no_convergence, "contour ratio landed outside the contour");
    const double size = 0.5 * std::max(c.hi().real() - c.lo().real(), c.hi().imag() - c.lo().imag());
    double h = std::min(0.5 * c.distance_to_boundary(z), 0.1 * size);
    const double scale = std::max(std::abs(z), size);
    for (int it = 0; it < 40; ++it) {
        const cplx zn = contour_ratio(det, contour::square(z, h));
        const double step = std::abs(zn - z);
        z = zn;
        if (step <= 1e-14 * scale && h <= 1e-3 * size) break;
        h = std::max(std::min(h * 0.1, 100.0 * step), 1e-6 * size);
        if (it == 39) throw error(errc::no_convergence, "pole refinement stalled");
    }
    zero_solution s;
    s.alpha = z;
    s.path = c;
    const contour verify = contour::square(z, size / 100.0);
    const auto wv = count_zeros_of(det, verify, opt);
    s.winding = wv.winding;
    if (wv.winding != 1) throw error(errc::no_convergence, "refined zero failed the small-contour winding check");
    s.residual = std::abs(det(z)) / wv.max_abs;
    if (!(s.residual < opt.residual_tolerance))
        throw error(errc::no_convergence, "residual of located zero above tolerance");
    return s;
}

struct search_region {
    double re_lo = 1.0, re_hi = 30.0; // Re alpha / k0
    double im_lo = 0.0, im_hi = 1e-4; // Im alpha, Np/m
    int nx = 8, ny = 8;
};

struct mode_solution {
    cplx alpha{};
    contour path;
    int winding = 0;
    double freq = 0.0;
    double residual = 0.0;
};

// A branch cut of a scaled layer (or the exterior) is crossed between a and b.
inline bool crosses_cut(const spectral_context& ctx, cplx a, cplx b, scaling mode = scaling::analytic)
{
    const int samples = 64;
    for (std::size_t i = 0; i <= ctx.n(); ++i) {
        if (i < ctx.n() && !detail::is_scaled(ctx, i, mode)) continue;
        if (i == 0) continue; // kappa_1 enters through odd/even pairs that keep F single-valued
        const cplx k2 = ctx.k2(i);
        cplx wp = a * a - k2;
        for (int s = 1; s <= samples; ++s) {
            const cplx z = a + (b - a) * (double(s) / samples);
            const cplx w = z * z - k2;
            if (w.imag() == 0.0 && w.real() <= 0.0) return true;
            if ((wp.imag() > 0.0) != (w.imag() > 0.0)) {
                const double t = wp.imag() / (wp.imag() - w.imag());
                const double re = wp.real() + t * (w.real() - wp.real());
                if (re <= 0.0) return true;
            }
            wp = w;
        }
    }
    return false;
}

inline bool crosses_cut(const spectral_context& ctx, const contour& c, scaling mode = scaling::analytic)
{
    const std::size_t n = c.vertices.size();
    for (std::size_t e = 0; e < n; ++e)
        if (crosses_cut(ctx, c.vertices[e], c.vertices[(e + 1) % n], mode)) return true;
    return false;
}

inline auto det_function(const spectral_context& ctx)
{
    return [&ctx](cplx a) { return det_dispersion(ctx, a, scaling::analytic).mantissa; };
}

inline winding_result count_zeros(const spectral_context& ctx, const contour& c, const search_options& opt = {})
{
    if (crosses_cut(ctx, c)) throw error(errc::cut_crossed, "contour intersects a branch cut");
    return count_zeros_of(det_function(ctx), c, opt);
}

inline mode_solution locate_pole(const spectral_context& ctx, const contour& c, const search_options& opt = {})
{
    if (crosses_cut(ctx, c)) throw error(errc::cut_crossed, "contour intersects a branch cut");
    const auto z = locate_zero_of(det_function(ctx), c, opt);
    return {z.alpha, z.path, z.winding, ctx.freq, z.residual};
}

struct search_report {
    std::vector<mode_solution> poles;
    std::vector<contour> clusters; // cells still holding several zeros at the size floor
    int total_count = 0;
};

// Cell search over a region of the upper half-plane; the part left of Re alpha_c is excluded.
inline search_report find_poles(const spectral_context& ctx, const search_region& reg, const search_options& opt = {})
{
    const double k0 = ctx.k0;
    const cplx ac = branch_point(ctx);
    double re_lo = reg.re_lo * k0, re_hi = reg.re_hi * k0;
    const double guard = 1e-3 * k0;
    re_lo = std::max(re_lo, ac.real() + guard);
    if (!(re_hi > re_lo)) throw error(errc::cut_crossed, "search region lies entirely left of the branch point");
    double im_lo = std::max(reg.im_lo, 0.0), im_hi = reg.im_hi;
    if (im_lo == 0.0) im_lo = 1e-9 * (im_hi - im_lo);
    const cplx lo(re_lo, im_lo), hi(re_hi, im_hi);
    const double floor_size = opt.min_cell_fraction * std::abs(hi - lo);

    search_report rep;
    // winding of a cell, or nothing when its boundary passes too close to a zero
    auto count = [&](cplx a, cplx b) -> std::optional<int> {
        try {
            return count_zeros(ctx, contour::rectangle(a, b), opt).winding;
        } catch (const error& e) {
            if (e.code() != errc::contour_too_close) throw;
            return std::nullopt;
        }
    };
    // split positions tried in turn when a cut line runs through a zero
    constexpr double offsets[] = {0.5, 0.5137, 0.4709, 0.5531, 0.4213, 0.6057};
    std::function<void(cplx, cplx, int)> visit;
    auto split = [&](cplx a, cplx b, bool along_re) {
        for (double t : offsets) {
            cplx m1, m2;
            if (along_re) {
                const double xm = a.real() + t * (b.real() - a.real());
                m1 = cplx(xm, b.imag()), m2 = cplx(xm, a.imag());
            } else {
                const double ym = a.imag() + t * (b.imag() - a.imag());
                m1 = cplx(b.real(), ym), m2 = cplx(a.real(), ym);
            }
            const auto w1 = count(a, m1);
            if (!w1) continue;
            const auto w2 = count(m2, b);
            if (!w2) continue;
            visit(a, m1, *w1);
            visit(m2, b, *w2);
            return;
        }
        throw error(errc::contour_too_close, "no cell split avoids the zeros of det A");
    };
    visit = [&](cplx a, cplx b, int w) {
        if (w == 0) return;
        const contour c = contour::rectangle(a, b);
        if (w == 1) {
            rep.poles.push_back(locate_pole(ctx, c, opt));
            rep.total_count += 1;
            return;
        }
        if (std::abs(b - a) < floor_size) {
            rep.clusters.push_back(c);
            rep.total_count += w;
            return;
        }
        const double wx = (b.real() - a.real()) / k0;
        const double wy = (b.imag() - a.imag()) / (reg.im_hi - reg.im_lo) * (reg.re_hi - reg.re_lo);
        split(a, b, wx >= wy);
    };
    const auto whole = count(lo, hi);
    if (!whole) throw error(errc::contour_too_close, "search region boundary passes too close to a zero of det A");
    // the nx-by-ny grid only seeds the subdivision; cells with several zeros keep splitting
    const int nx = std::max(1, reg.nx), ny = std::max(1, reg.ny);
    std::function<void(cplx, cplx, int, int, int)> grid = [&](cplx a, cplx b, int w, int mx, int my) {
        if (w == 0) return;
        if (mx <= 1 && my <= 1) return visit(a, b, w);
        const bool along_re = mx >= my;
        const int m = along_re ? mx : my;
        const int h = m / 2;
        for (double t : offsets) {
            const double frac = (h + (t - 0.5)) / m;
            cplx m1, m2;
            if (along_re) {
                const double xm = a.real() + frac * (b.real() - a.real());
                m1 = cplx(xm, b.imag()), m2 = cplx(xm, a.imag());
            } else {
                const double ym = a.imag() + frac * (b.imag() - a.imag());
                m1 = cplx(b.real(), ym), m2 = cplx(a.real(), ym);
            }
            const auto w1 = count(a, m1);
            if (!w1) continue;
            const auto w2 = count(m2, b);
            if (!w2) continue;
            if (along_re) {
                grid(a, m1, *w1, h, my);
                grid(m2, b, *w2, mx - h, my);
            } else {
                grid(a, m1, *w1, mx, h);
                grid(m2, b, *w2, mx, my - h);
            }
            return;
        }
        throw error(errc::contour_too_close, "no grid line avoids the zeros of det A");
    };
    grid(lo, hi, *whole, nx, ny);
    std::sort(rep.poles.begin(), rep.poles.end(), [](const mode_solution& x, const mode_solution& y) {
        return x.alpha.real() > y.alpha.real();
    });
    return rep;
}

struct trace_options {
    search_options search;
    double max_jump = 0.2; // relative change of alpha/k0 between neighbours
    int max_substeps = 6;
};

namespace detail {

inline contour continuation_square(const spectral_context& ctx, cplx pred, double half)
{
    const cplx ac = branch_point(ctx);
    const double room = pred.real() - ac.real();
    half = std::min(half, 0.9 * room);
    return contour::square(pred, half);
}

// Next pole from a prediction; adjusts the box until it holds exactly one zero.
inline mode_solution continue_pole(const spectral_context& ctx, cplx pred, double half, const trace_options& opt)
{
    for (int attempt = 0; attempt < 12; ++attempt) {
        const contour c = continuation_square(ctx, pred, half);
        winding_result w;
        try {
            w = count_zeros(ctx, c, opt.search);
        } catch (const error& e) {
            if (e.code() != errc::contour_too_close) throw;
            half *= 1.37;
            continue;
        }
        if (w.winding == 1) return locate_pole(ctx, c, opt.search);
        half = w.winding == 0 ? half * 2.0 : half * 0.5;
    }
    throw error(errc::continuation_break, "no isolated pole near the predicted position");
}

} // namespace detail

// Continues a located pole through increasing frequencies; returns one solution per entry of freqs.
inline std::vector<mode_solution> trace_mode_from(const layer_stack& stack, const mode_solution& start,
                                                  const std::vector<double>& freqs, const trace_options& opt = {})
{
    std::function<mode_solution(const mode_solution&, double, int)> step =
        [&](const mode_solution& prev, double f, int depth) -> mode_solution {
        spectral_context ctx(stack, f);
        const double ratio = ctx.k0 / (2.0 * constants::pi * prev.freq / constants::c0);
        const cplx pred = prev.alpha * ratio;
        const double half = 0.05 * std::abs(pred - branch_point(ctx));
        try {
            auto s = detail::continue_pole(ctx, pred, half, opt);
            const cplx n_old = prev.alpha / (ctx.k0 / ratio), n_new = s.alpha / ctx.k0;
            if (std::abs(n_new - n_old) > opt.max_jump * std::abs(n_old))
                throw error(errc::continuation_break, "pole jumped between neighbouring frequencies");
            return s;
        } catch (const error& e) {
            if (depth >= opt.max_substeps) throw;
            const double fm = 0.5 * (prev.freq + f);
            const auto mid = step(prev, fm, depth + 1);
            return step(mid, f, depth + 1);
        }
    };
    std::vector<mode_solution> out;
    const mode_solution* prev = &start;
    for (double f : freqs) {
        out.push_back(step(*prev, f, 0));
        prev = &out.back();
    }
    return out;
}

// Pole in a seed region. mode_index 0: the region must hold exactly one pole; k >= 1: the k-th
// pole ordered by decreasing Re alpha/k0.
inline mode_solution seed_pole(const layer_stack& stack, double f, const search_region& seed, int mode_index = 0,
                               const search_options& opt = {})
{
    spectral_context ctx(stack, f);
    const auto rep = find_poles(ctx, seed, opt);
    const int found = static_cast<int>(rep.poles.size());
    if (mode_index == 0) {
        if (rep.total_count != 1 || found != 1)
            throw error(errc::not_simple_zero, "seed region holds " + std::to_string(rep.total_count) + " poles, expected 1");
        return rep.poles.front();
    }
    if (mode_index < 0 || mode_index > found)
        throw error(errc::not_simple_zero, "seed region holds " + std::to_string(found) + " poles");
    return rep.poles[mode_index - 1];
}

// Seed pole at the first frequency, then continuation through the rest.
inline std::vector<mode_solution> trace_mode(const layer_stack& stack, const std::vector<double>& freqs,
                                             const search_region& seed, int mode_index = 0,
                                             const trace_options& opt = {})
{
    if (freqs.empty()) throw error(errc::config, "empty frequency list");
    std::vector<mode_solution> out{seed_pole(stack, freqs[0], seed, mode_index, opt.search)};
    const auto rest = trace_mode_from(stack, out.front(), std::vector<double>(freqs.begin() + 1, freqs.end()), opt);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

} // namespace coaxdisp

#endif
