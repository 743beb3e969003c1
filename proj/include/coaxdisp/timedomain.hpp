#ifndef COAXDISP_TIMEDOMAIN_HPP
#define COAXDISP_TIMEDOMAIN_HPP

#include "impedance.hpp"
#include "modes.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace coaxdisp {

// Time dependence e^{-i omega t}: v(t) = int V(f) e^{-i 2 pi f t} df, so e^{i alpha z} is a delay.
struct frequency_grid {
    std::size_t n_fft = 0;
    double f_nyquist = 0.0;

    static frequency_grid make(std::size_t n, double f_nyq)
    {
        if (n < 4 || (n & (n - 1)) != 0) throw error(errc::grid_mismatch, "n_fft must be a power of two >= 4");
        if (!(f_nyq > 0.0) || !std::isfinite(f_nyq)) throw error(errc::grid_mismatch, "Nyquist frequency must be positive");
        return {n, f_nyq};
    }

    std::size_t bins() const { return n_fft / 2 + 1; }
    double df() const { return f_nyquist / static_cast<double>(n_fft / 2); }
    double dt() const { return 1.0 / (2.0 * f_nyquist); }
    double freq(std::size_t k) const { return df() * static_cast<double>(k); }
    double period() const { return dt() * static_cast<double>(n_fft); }
};

enum class window_kind { rectangular, hann, tukey };

// Taper over [0, f_max] of the one-sided spectrum; zero above f_max.
struct spectral_window {
    window_kind kind = window_kind::tukey;
    double taper = 0.25;  // Tukey fraction (two-sided)
    double f_max = 0.0;   // 0: Nyquist

    double operator()(double f, double f_nyq) const
    {
        const double fm = f_max > 0.0 ? f_max : f_nyq;
        const double x = std::abs(f) / fm;
        if (x > 1.0) return 0.0;
        switch (kind) {
        case window_kind::rectangular: return 1.0;
        case window_kind::hann: return 0.5 * (1.0 + std::cos(constants::pi * x));
        case window_kind::tukey: {
            const double flat = 1.0 - 0.5 * taper;
            if (x <= flat || taper <= 0.0) return 1.0;
            return 0.5 * (1.0 + std::cos(constants::pi * (x - flat) / (0.5 * taper)));
        }
        }
        return 1.0;
    }

    std::string describe() const
    {
        switch (kind) {
        case window_kind::rectangular: return "rectangular";
        case window_kind::hann: return "hann";
        case window_kind::tukey: return "tukey(" + std::to_string(taper) + ")";
        }
        return "unknown";
    }
};

struct pulse_result {
    std::vector<double> t, v;
    std::vector<cplx> spectrum; // windowed, one-sided, V/Hz
    std::string window;
    double max_imag = 0.0;      // largest |Im v| before the real part was taken
};

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// In-place complex DFT with sign -1 (forward) or +1.
inline void dft(std::vector<cplx>& x, int sign)
{
    const int n = static_cast<int>(x.size());
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

} // namespace detail

// Two-sided spectrum from bins 0..N/2; DC and Nyquist keep only their real parts.
inline std::vector<cplx> hermitian_extension(const std::vector<cplx>& one_sided, std::size_t n)
{
    if (one_sided.size() != n / 2 + 1) throw error(errc::grid_mismatch, "spectrum length does not match the grid");
    std::vector<cplx> x(n);
    x[0] = one_sided[0].real();
    x[n / 2] = one_sided[n / 2].real();
    for (std::size_t k = 1; k < n / 2; ++k) {
        x[k] = one_sided[k];
        x[n - k] = std::conj(one_sided[k]);
    }
    return x;
}

inline pulse_result synthesize_pulse(const std::vector<cplx>& spectrum, const frequency_grid& grid,
                                     const spectral_window& window = {})
{
    if (spectrum.size() != grid.bins()) throw error(errc::grid_mismatch, "spectrum length does not match the grid");
    pulse_result r;
    r.window = window.describe();
    r.spectrum.resize(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k)
        r.spectrum[k] = spectrum[k] * window(grid.freq(k), grid.f_nyquist);
    auto x = hermitian_extension(r.spectrum, grid.n_fft);
    // sum_k X_k e^{-2 pi i k n / N}
    detail::dft(x, -1);
    const double df = grid.df();
    r.t.resize(grid.n_fft);
    r.v.resize(grid.n_fft);
    for (std::size_t n = 0; n < grid.n_fft; ++n) {
        r.t[n] = grid.dt() * static_cast<double>(n);
        r.v[n] = df * x[n].real();
        r.max_imag = std::max(r.max_imag, df * std::abs(x[n].imag()));
    }
    return r;
}

// Inverse of synthesize_pulse with a rectangular window: V_k = dt sum_n v_n e^{2 pi i k n / N}.
inline std::vector<cplx> analyze(const std::vector<double>& v, const frequency_grid& grid)
{
    if (v.size() != grid.n_fft) throw error(errc::grid_mismatch, "time series length does not match the grid");
    std::vector<cplx> x(v.begin(), v.end());
    detail::dft(x, +1);
    std::vector<cplx> s(grid.bins());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = grid.dt() * x[k];
    return s;
}

inline double spectrum_energy(const std::vector<cplx>& one_sided, const frequency_grid& grid)
{
    double e = std::norm(one_sided.front().real()) + std::norm(one_sided.back().real());
    for (std::size_t k = 1; k + 1 < one_sided.size(); ++k) e += 2.0 * std::norm(one_sided[k]);
    return e * grid.df();
}

inline double time_energy(const std::vector<double>& v, const frequency_grid& grid)
{
    double e = 0.0;
    for (double x : v) e += x * x;
    return e * grid.dt();
}

// Square pulse with raised-cosine edges, starting at t = start.
struct raised_cosine_pulse {
    double amplitude = 1.0; // A
    double width = 100e-6;  // s, between half-amplitude points
    double rise = 20e-6;    // s, 0 -> full amplitude
    double start = 0.0;     // s

    double operator()(double t) const
    {
        const double t1 = t - start;
        const double top = width - rise; // flat part
        if (t1 <= 0.0 || t1 >= top + 2.0 * rise) return 0.0;
        if (t1 < rise) return amplitude * 0.5 * (1.0 - std::cos(constants::pi * t1 / rise));
        if (t1 <= rise + top) return amplitude;
        const double t2 = t1 - rise - top;
        return amplitude * 0.5 * (1.0 + std::cos(constants::pi * t2 / rise));
    }

    std::vector<double> sample(const frequency_grid& grid) const
    {
        if (!(rise > 0.0) || !(width >= rise)) throw error(errc::config, "pulse needs rise > 0 and width >= rise");
        std::vector<double> v(grid.n_fft);
        for (std::size_t n = 0; n < v.size(); ++n) v[n] = (*this)(grid.dt() * static_cast<double>(n));
        return v;
    }
};

// Output voltage across the measuring resistor.
inline cplx transfer_voltage(cplx z1, cplx i1, double r_load = 25.0)
{
    if (std::isinf(r_load)) return 2.0 * z1 * i1;
    if (std::isinf(z1.real()) || std::isinf(z1.imag())) return 2.0 * r_load * i1;
    return z1 * i1 * 2.0 * r_load / (z1 + r_load);
}

struct sweep_plan {
    search_region seed;
    int mode_index = 0;       // see seed_pole
    double seed_freq = 0.0;   // where the seed region applies; 0: first frequency
    bool impedance = true;
    double rho_L = default_rho_L;
    unsigned threads = 1;
    std::size_t chunk = 32; // frequencies per continuation chunk; independent of threads
    trace_options trace;
    impedance_options imp;
};

struct sweep_point {
    double freq = 0.0;
    bool ok = false;
    std::string error;
    mode_solution mode;
    std::optional<impedance> z;
};

// Modes (and impedance) over an increasing frequency list. Chunk seeds come from a
// sequential trace over the chunk start frequencies; chunks then run in parallel and
// each continues from its own seed, so the result does not depend on the schedule.
inline std::vector<sweep_point> sweep(const layer_stack& stack, const std::vector<double>& freqs, const sweep_plan& plan)
{
    if (freqs.empty()) throw error(errc::config, "empty frequency list");
    for (std::size_t k = 1; k < freqs.size(); ++k)
        if (!(freqs[k] > freqs[k - 1])) throw error(errc::config, "frequencies must be strictly increasing");
    const std::size_t chunk = std::max<std::size_t>(1, plan.chunk);
    const std::size_t nchunks = (freqs.size() + chunk - 1) / chunk;
    std::vector<double> starts;
    for (std::size_t c = 0; c < nchunks; ++c) starts.push_back(freqs[c * chunk]);
    const double fs = plan.seed_freq > 0.0 ? plan.seed_freq : freqs.front();
    const auto first = seed_pole(stack, fs, plan.seed, plan.mode_index, plan.trace.search);
    std::vector<mode_solution> seeds;
    if (fs == starts.front()) {
        seeds.push_back(first);
        const auto rest = trace_mode_from(stack, first, std::vector<double>(starts.begin() + 1, starts.end()), plan.trace);
        seeds.insert(seeds.end(), rest.begin(), rest.end());
    } else {
        seeds = trace_mode_from(stack, first, starts, plan.trace);
    }

    std::vector<sweep_point> out(freqs.size());
    auto finish = [&](sweep_point& p) {
        if (!plan.impedance) return;
        try {
            spectral_context ctx(stack, p.freq);
            p.z = characteristic_impedance(ctx, p.mode.alpha, plan.rho_L, plan.imp);
        } catch (const std::exception& e) {
            p.ok = false;
            p.error = e.what();
        }
    };
    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = c * chunk, hi = std::min(freqs.size(), lo + chunk);
        mode_solution prev = seeds[c];
        out[lo].freq = freqs[lo];
        out[lo].mode = prev;
        out[lo].ok = true;
        finish(out[lo]);
        for (std::size_t k = lo + 1; k < hi; ++k) {
            auto& p = out[k];
            p.freq = freqs[k];
            try {
                const auto tr = trace_mode_from(stack, prev, {freqs[k]}, plan.trace);
                p.mode = tr.back();
                p.ok = true;
                prev = p.mode;
                finish(p);
            } catch (const std::exception& e) {
                p.ok = false;
                p.error = e.what();
            }
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(plan.threads, static_cast<unsigned>(nchunks)));
    if (nt == 1) {
        for (std::size_t c = 0; c < nchunks; ++c) run_chunk(c);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < nchunks; c = next++) run_chunk(c);
        });
    for (auto& th : pool) th.join();
    return out;
}

namespace detail {

// Least-squares quadratic through (x, y), evaluated at x0.
inline cplx quadratic_extrapolate(const std::vector<double>& x, const std::vector<cplx>& y, double x0)
{
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(x.size()), 3);
    Eigen::VectorXcd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        A(r, 0) = 1.0;
        A(r, 1) = x[i];
        A(r, 2) = x[i] * x[i];
        b(r) = y[i];
    }
    const Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
    return c(0) + c(1) * x0 + c(2) * x0 * x0;
}

} // namespace detail

// limit: DC from alpha_1 -> 0, |Z_1| -> infinity (Z_1 grows like f^{-1/2}), bin 1 computed.
// quadratic: bins 0 and 1 from a quadratic fit of alpha/k0 and Z_1 over bins 2..5.
enum class dc_policy { limit, quadratic };

struct transfer_bin {
    double freq = 0.0;
    cplx alpha{};      // 1/m
    cplx z1{};         // ohm
    cplx i_in{};       // A/Hz
    cplx i1{};         // A/Hz at z
    cplx v1{};         // V/Hz
    bool extrapolated = false;
};

struct pulse_plan {
    sweep_plan sweep;
    double z = 81.8e3;
    double r_load = 25.0;
    spectral_window window;
    dc_policy dc = dc_policy::limit;
};

struct pulse_run {
    std::vector<transfer_bin> bins;
    pulse_result output;
    std::vector<sweep_point> failures;
};

// Dominant-mode pulse: the excitation is calibrated so that mode p alone carries the
// input current at z = 0, I_1(omega, z) = I_in(omega) e^{i alpha_1 z}.
inline pulse_run propagate_pulse(const layer_stack& stack, const frequency_grid& grid,
                                 const std::vector<cplx>& input_spectrum, const pulse_plan& plan)
{
    if (input_spectrum.size() != grid.bins()) throw error(errc::grid_mismatch, "input spectrum does not match the grid");
    const std::size_t nb = grid.bins();
    const std::size_t first = plan.dc == dc_policy::limit ? 1 : 2;
    if (nb < first + 5) throw error(errc::grid_mismatch, "grid too small for the low-frequency treatment");
    std::vector<double> freqs;
    for (std::size_t k = first; k < nb; ++k) freqs.push_back(grid.freq(k));
    sweep_plan sp = plan.sweep;
    sp.impedance = true;
    const auto pts = sweep(stack, freqs, sp);

    pulse_run run;
    run.bins.resize(nb);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& p = pts[k];
        if (!p.ok) {
            run.failures.push_back(p);
            continue;
        }
        auto& b = run.bins[k + first];
        b.alpha = p.mode.alpha;
        b.z1 = p.z->z;
    }
    if (!run.failures.empty())
        throw error(errc::no_convergence, std::to_string(run.failures.size()) + " frequencies failed, first at " +
                                              std::to_string(run.failures.front().freq) + " Hz: " +
                                              run.failures.front().error);
    if (plan.dc == dc_policy::limit) {
        run.bins[0].alpha = 0.0;
        run.bins[0].z1 = cplx(INFINITY, 0.0);
        run.bins[0].extrapolated = true;
    } else {
        std::vector<double> fx;
        std::vector<cplx> nx, zx;
        for (std::size_t k = 2; k < 6; ++k) {
            const double k0 = 2.0 * constants::pi * grid.freq(k) / constants::c0;
            fx.push_back(grid.freq(k));
            nx.push_back(run.bins[k].alpha / k0);
            zx.push_back(run.bins[k].z1);
        }
        for (std::size_t k = 0; k < 2; ++k) {
            const double f = grid.freq(k);
            run.bins[k].alpha = detail::quadratic_extrapolate(fx, nx, f) * (2.0 * constants::pi * f / constants::c0);
            run.bins[k].z1 = detail::quadratic_extrapolate(fx, zx, f);
            run.bins[k].extrapolated = true;
        }
    }

    std::vector<cplx> v(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        auto& b = run.bins[k];
        b.freq = grid.freq(k);
        b.i_in = input_spectrum[k];
        b.i1 = b.i_in * std::exp(I * b.alpha * plan.z);
        b.v1 = transfer_voltage(b.z1, b.i1, plan.r_load);
        v[k] = b.v1;
    }
    run.output = synthesize_pulse(v, grid, plan.window);
    return run;
}

// Fraction of the energy of v before time t_a.
inline double energy_before(const pulse_result& r, double t_a)
{
    double pre = 0.0, tot = 0.0;
    for (std::size_t n = 0; n < r.v.size(); ++n) {
        const double e = r.v[n] * r.v[n];
        tot += e;
        if (r.t[n] < t_a) pre += e;
    }
    return tot > 0.0 ? pre / tot : 0.0;
}

inline double peak_time(const pulse_result& r)
{
    std::size_t best = 0;
    for (std::size_t n = 1; n < r.v.size(); ++n)
        if (std::abs(r.v[n]) > std::abs(r.v[best])) best = n;
    return r.t[best];
}

} // namespace coaxdisp

#endif
