#ifndef COAXDISP_CLI_HPP
#define COAXDISP_CLI_HPP

#include "config.hpp"
#include "spectral.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace coaxdisp {

using cell = std::variant<double, long long, std::string>;

struct table {
    std::string name; // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<cell>> rows;
};

struct command_result {
    std::vector<table> tables;
    table failures{"failures", {"f_Hz", "mode_index", "error"}, {}};
    std::vector<std::string> notes;
    bool ok() const { return failures.rows.empty(); }
};

using logger = std::function<void(const std::string&)>;

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string format_cell(const cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    std::string s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

inline std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string to_csv(const table& t, const std::string& command, const std::string& config_text)
{
    std::string s = "# coaxdisp " + command + " config_fnv1a=" + hash_hex(fnv1a(config_text)) + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + format_cell(r[i]);
        s += "\n";
    }
    return s;
}

inline std::string to_json(const table& t, const std::string& command, const std::string& config_text)
{
    nlohmann::json j;
    j["command"] = command;
    j["config_fnv1a"] = hash_hex(fnv1a(config_text));
    j["columns"] = t.columns;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& c : r) {
            if (const auto* d = std::get_if<double>(&c)) {
                if (std::isfinite(*d)) row.push_back(*d);
                else row.push_back(format_double(*d)); // JSON has no inf/nan
            } else if (const auto* i = std::get_if<long long>(&c)) {
                row.push_back(*i);
            } else {
                row.push_back(std::get<std::string>(c));
            }
        }
        j["rows"].push_back(row);
    }
    return j.dump(1) + "\n";
}

namespace detail {

inline double db_per_100km(cplx alpha) { return alpha.imag() * constants::db_per_100km; }
inline double alpha_over_k0(const spectral_context& ctx, cplx alpha) { return alpha.real() / ctx.k0; }
inline double db_micro_amp(cplx i) { return 20.0 * std::log10(std::abs(i) / 1e-6); }

inline void require_windows(const run_config& c)
{
    if (c.windows.empty()) throw error(errc::config, "modes.windows is empty");
}

inline sweep_plan plan_for(const run_config& c, const mode_window& w, bool impedance)
{
    sweep_plan p;
    p.seed = w.region();
    p.mode_index = 0;
    p.impedance = impedance;
    p.rho_L = c.rho_L;
    p.threads = c.threads;
    p.chunk = c.chunk;
    p.trace = c.trace;
    p.imp = c.imp;
    return p;
}

// Traced modes per window; a window whose seed fails is reported for every frequency.
inline std::vector<std::vector<sweep_point>> trace_windows(const run_config& c, bool impedance, const logger& log,
                                                           command_result& res)
{
    std::vector<std::vector<sweep_point>> all;
    for (std::size_t w = 0; w < c.windows.size(); ++w) {
        const long long p = static_cast<long long>(w + 1);
        if (log) log("tracing window " + c.windows[w].label + " over " + std::to_string(c.frequencies.size()) + " frequencies");
        std::vector<sweep_point> pts;
        try {
            pts = sweep(c.cable, c.frequencies, plan_for(c, c.windows[w], impedance));
        } catch (const error& e) {
            pts.assign(c.frequencies.size(), sweep_point{});
            for (std::size_t k = 0; k < pts.size(); ++k) {
                pts[k].freq = c.frequencies[k];
                pts[k].error = e.what();
            }
        }
        for (const auto& pt : pts)
            if (!pt.ok) res.failures.rows.push_back({pt.freq, p, pt.error});
        all.push_back(std::move(pts));
    }
    return all;
}

} // namespace detail

inline command_result cmd_modes(const run_config& c, const logger& log = {})
{
    detail::require_windows(c);
    command_result res;
    table t{"modes", {"f_Hz", "mode_index", "re_alpha_over_k0", "im_alpha_dB_per_100km", "residual"}, {}};
    const auto all = detail::trace_windows(c, false, log, res);
    for (std::size_t k = 0; k < c.frequencies.size(); ++k)
        for (std::size_t w = 0; w < all.size(); ++w) {
            const auto& pt = all[w][k];
            if (!pt.ok) continue;
            spectral_context ctx(c.cable, pt.freq);
            t.rows.push_back({pt.freq, static_cast<long long>(w + 1), detail::alpha_over_k0(ctx, pt.mode.alpha),
                              detail::db_per_100km(pt.mode.alpha), pt.mode.residual});
        }
    res.tables.push_back(std::move(t));
    return res;
}

inline command_result cmd_impedance(const run_config& c, const logger& log = {})
{
    detail::require_windows(c);
    command_result res;
    table t{"impedance",
            {"f_Hz", "mode_index", "re_alpha_over_k0", "im_alpha_dB_per_100km", "re_Z_ohm", "im_Z_ohm"}, {}};
    const auto all = detail::trace_windows(c, true, log, res);
    for (std::size_t k = 0; k < c.frequencies.size(); ++k)
        for (std::size_t w = 0; w < all.size(); ++w) {
            const auto& pt = all[w][k];
            if (!pt.ok || !pt.z) continue;
            spectral_context ctx(c.cable, pt.freq);
            t.rows.push_back({pt.freq, static_cast<long long>(w + 1), detail::alpha_over_k0(ctx, pt.mode.alpha),
                              detail::db_per_100km(pt.mode.alpha), pt.z->z.real(), pt.z->z.imag()});
        }
    res.tables.push_back(std::move(t));
    return res;
}

// Modal and branch-cut conductor currents. M = 1 unless calibrate is set, in which case M
// makes the total current 1 A at z = 1 m.
inline command_result cmd_currents(const run_config& c, const logger& log = {})
{
    detail::require_windows(c);
    if (c.z_m.empty()) throw error(errc::config, "currents.z_m is empty");
    command_result res;
    table t{"currents", {"f_Hz", "z_m", "component", "mode_index", "re_A", "im_A", "abs_dB_uA"}, {}};
    const auto all = detail::trace_windows(c, false, log, res);
    const double z_min = *std::min_element(c.z_m.begin(), c.z_m.end());
    for (std::size_t k = 0; k < c.frequencies.size(); ++k) {
        const double f = c.frequencies[k];
        std::vector<mode_solution> modes;
        std::vector<long long> index;
        for (std::size_t w = 0; w < all.size(); ++w)
            if (all[w][k].ok) {
                modes.push_back(all[w][k].mode);
                index.push_back(static_cast<long long>(w + 1));
            }
        if (log) log("currents at " + format_double(f) + " Hz");
        try {
            spectral_context ctx(c.cable, f);
            cplx M = 1.0;
            if (c.calibrate) M = calibrate_M(ctx, modes, 1.0, 1.0, false).M;
            const double m_rest = c.upper_bound ? rest_term_bound(ctx, M, z_min) : 0.0;
            for (double z : c.z_m) {
                auto row = [&](const char* comp, long long p, cplx v) {
                    t.rows.push_back({f, z, std::string(comp), p, v.real(), v.imag(), detail::db_micro_amp(v)});
                };
                for (std::size_t m = 0; m < modes.size(); ++m)
                    row("mode", index[m], modal_current(ctx, modes[m], M, z, static_cast<int>(index[m])).value);
                if (c.branch) row("branch_cut", 0, branch_current(ctx, M, z).value);
                if (c.asymptotic) row("branch_asymptotic", 0, branch_asymptotic(ctx, M, z).value);
                if (c.upper_bound) row("branch_upper_bound", 0, branch_upper_bound(ctx, M, m_rest, z).value);
            }
        } catch (const error& e) {
            res.failures.rows.push_back({f, 0LL, std::string(e.what())});
        }
    }
    res.tables.push_back(std::move(t));
    return res;
}

// Measured input-current spectrum, one row per grid bin: f_Hz, re_A, im_A (A/Hz).
inline std::vector<cplx> read_input_spectrum(const std::string& path, const frequency_grid& grid)
{
    std::ifstream in(path);
    if (!in) throw error(errc::config, "cannot open input spectrum '" + path + "'");
    std::vector<cplx> s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::stringstream ss(line);
        double f, re, im;
        char c1, c2;
        if (!(ss >> f >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
            throw error(errc::config, "input spectrum: malformed line '" + line + "'");
        const std::size_t k = s.size();
        if (k >= grid.bins() || std::abs(f - grid.freq(k)) > 1e-9 * std::max(1.0, grid.freq(k)))
            throw error(errc::grid_mismatch, "input spectrum frequencies do not match the grid");
        s.emplace_back(re, im);
    }
    if (s.size() != grid.bins()) throw error(errc::grid_mismatch, "input spectrum has the wrong number of bins");
    return s;
}

struct pulse_outcome {
    command_result result;
    pulse_run run;
    pulse_result passthrough; // same network at z = 0
    std::vector<double> input;
};

inline pulse_outcome run_pulse(const run_config& c, const logger& log = {})
{
    detail::require_windows(c);
    if (c.pulse_mode >= c.windows.size()) throw error(errc::config, "pulse.mode_window out of range");
    pulse_outcome out;
    const auto& grid = c.grid;
    std::vector<cplx> iin;
    if (c.input.csv.empty()) {
        raised_cosine_pulse p{c.input.amplitude, c.input.width, c.input.rise, c.input.start};
        out.input = p.sample(grid);
        iin = analyze(out.input, grid);
    } else {
        iin = read_input_spectrum(c.input.csv, grid);
    }
    pulse_plan pp;
    pp.sweep = detail::plan_for(c, c.windows[c.pulse_mode], true);
    pp.sweep.seed_freq = c.seed_frequency > 0.0 ? c.seed_frequency : c.frequencies.front();
    pp.z = c.pulse_z;
    pp.r_load = c.r_load;
    pp.window = c.window;
    pp.dc = c.dc;
    if (log) log("pulse: " + std::to_string(grid.bins()) + " bins up to " + format_double(grid.f_nyquist) + " Hz");
    out.result.notes.push_back(c.all_currents ? "pulse composition: dominant mode; |I2| and |I_br| columns up to " +
                                                    format_double(c.currents_fmax) + " Hz"
                                              : "pulse composition: dominant mode only");
    out.run = propagate_pulse(c.cable, grid, iin, pp);
    std::vector<cplx> v0(grid.bins());
    for (std::size_t k = 0; k < v0.size(); ++k)
        v0[k] = transfer_voltage(out.run.bins[k].z1, out.run.bins[k].i_in, c.r_load);
    out.passthrough = synthesize_pulse(v0, grid, c.window);

    table tp{"pulse", {"t_s", "v_V", "v_z0_V"}, {}};
    for (std::size_t n = 0; n < grid.n_fft; ++n)
        tp.rows.push_back({out.run.output.t[n], out.run.output.v[n], out.passthrough.v[n]});

    table ts{"pulse_spectrum",
             {"f_Hz", "re_alpha_over_k0", "im_alpha_dB_per_100km", "re_Z_ohm", "im_Z_ohm", "re_I_in", "im_I_in",
              "re_V1", "im_V1", "window"},
             {}};
    std::vector<double> abs_i1, abs_i2, abs_ibr;
    if (c.all_currents) {
        std::vector<double> fl;
        for (std::size_t k = 1; k < grid.bins() && grid.freq(k) <= c.currents_fmax; ++k) fl.push_back(grid.freq(k));
        abs_i1.assign(grid.bins(), std::numeric_limits<double>::quiet_NaN());
        abs_i2 = abs_i1;
        abs_ibr = abs_i1;
        if (!fl.empty()) {
            std::vector<std::vector<sweep_point>> traced;
            for (const auto& w : c.windows) {
                auto sp = detail::plan_for(c, w, false);
                sp.seed_freq = pp.sweep.seed_freq;
                traced.push_back(sweep(c.cable, fl, sp));
            }
            for (std::size_t k = 0; k < fl.size(); ++k) {
                if (log) log("pulse currents at " + format_double(fl[k]) + " Hz");
                try {
                    spectral_context ctx(c.cable, fl[k]);
                    std::vector<mode_solution> ms;
                    for (const auto& tr : traced)
                        if (tr[k].ok) ms.push_back(tr[k].mode);
                    if (ms.size() != c.windows.size()) throw error(errc::no_convergence, "mode missing at this frequency");
                    const cplx M = calibrate_M(ctx, ms, iin[k + 1], 1.0, false).M;
                    auto cur = [&](std::size_t p) {
                        return std::abs(residue_current(ctx, ms[p], M) * std::exp(I * ms[p].alpha * c.pulse_z));
                    };
                    abs_i1[k + 1] = cur(c.pulse_mode);
                    if (ms.size() > 1) abs_i2[k + 1] = cur(c.pulse_mode == 0 ? 1 : 0);
                    abs_ibr[k + 1] = std::abs(branch_current(ctx, M, c.pulse_z).value);
                } catch (const error& e) {
                    out.result.failures.rows.push_back({fl[k], 0LL, std::string(e.what())});
                }
            }
        }
        ts.columns.insert(ts.columns.end(), {"abs_I1_A", "abs_I2_A", "abs_Ibr_A"});
    }
    for (std::size_t k = 0; k < grid.bins(); ++k) {
        const auto& b = out.run.bins[k];
        const double k0 = 2.0 * constants::pi * b.freq / constants::c0;
        const double n = k0 > 0.0 ? b.alpha.real() / k0 : std::numeric_limits<double>::quiet_NaN();
        std::vector<cell> r{b.freq, n, detail::db_per_100km(b.alpha), b.z1.real(), b.z1.imag(), b.i_in.real(),
                            b.i_in.imag(), b.v1.real(), b.v1.imag(), c.window(b.freq, grid.f_nyquist)};
        if (c.all_currents) r.insert(r.end(), {abs_i1[k], abs_i2[k], abs_ibr[k]});
        ts.rows.push_back(std::move(r));
    }
    out.result.tables.push_back(std::move(tp));
    out.result.tables.push_back(std::move(ts));
    return out;
}

inline command_result cmd_pulse(const run_config& c, const logger& log = {})
{
    return run_pulse(c, log).result;
}

// Writes every table (and the failure list when non-empty) into dir.
inline std::vector<std::string> write_outputs(const command_result& r, const std::string& command,
                                              const run_config& c, const std::string& dir, bool json)
{
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const table& t) {
        const std::string path = (std::filesystem::path(dir) / (t.name + (json ? ".json" : ".csv"))).string();
        std::ofstream o(path, std::ios::binary);
        if (!o) throw error(errc::config, "cannot write '" + path + "'");
        o << (json ? to_json(t, command, c.canonical) : to_csv(t, command, c.canonical));
        written.push_back(path);
    };
    for (const auto& t : r.tables) put(t);
    if (!r.failures.rows.empty()) {
        table f = r.failures;
        f.name = command + "_failures";
        put(f);
    }
    return written;
}

} // namespace coaxdisp

#endif
