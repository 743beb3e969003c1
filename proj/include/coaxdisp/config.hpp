#ifndef COAXDISP_CONFIG_HPP
#define COAXDISP_CONFIG_HPP

#include "timedomain.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace coaxdisp {

// Search window in the units of the pole-search plots: Re alpha/k0 and Im alpha in dB/100 km.
struct mode_window {
    std::string label;
    double re_lo = 0.0, re_hi = 0.0;
    double im_lo_db = 0.0, im_hi_db = 0.0;
    int nx = 2, ny = 2;

    search_region region() const
    {
        return {re_lo, re_hi, im_lo_db / constants::db_per_100km, im_hi_db / constants::db_per_100km, nx, ny};
    }
};

struct pulse_input {
    double amplitude = 1.0;   // A
    double width = 250e-6;    // s
    double rise = 250e-6;     // s
    double start = 0.0;       // s
    std::string csv;          // measured spectrum (f_Hz, re_A, im_A) instead of the synthetic pulse
};

struct run_config {
    std::string analysis;     // optional; must match the subcommand when present
    layer_stack cable;
    std::vector<double> frequencies;
    std::vector<mode_window> windows;
    search_options search;
    trace_options trace;

    double rho_L = default_rho_L;
    impedance_options imp;

    std::vector<double> z_m;
    bool branch = true;
    bool asymptotic = true;
    bool upper_bound = true;
    bool calibrate = false;

    frequency_grid grid = {2048, 102400.0};
    double pulse_z = 81.8e3;
    double r_load = 25.0;
    spectral_window window;
    dc_policy dc = dc_policy::limit;
    pulse_input input;
    std::size_t pulse_mode = 0;      // index into windows
    double seed_frequency = 0.0;     // 0: first frequency of the list
    bool all_currents = false;
    double currents_fmax = 3000.0;

    unsigned threads = 1;
    std::size_t chunk = 32;
    std::string output_dir = "out";

    std::string canonical; // normalised JSON text; source of the hash
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw error(errc::config, where + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw error(errc::config, where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw error(errc::config, where + "." + key + ": wrong type");
    }
}

inline double positive(double v, const std::string& what)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw error(errc::config, what + " must be positive");
    return v;
}

inline layer parse_layer(const json& j, const std::string& where, bool exterior)
{
    if (exterior)
        reject_unknown(j, where, {"name", "eps_r", "sigma", "mu_r", "low_eps_ok"});
    else
        reject_unknown(j, where, {"name", "radius_mm", "eps_r", "sigma", "mu_r", "low_eps_ok"});
    layer l;
    l.name = get_or<std::string>(j, "name", exterior ? "exterior" : "", where);
    if (!exterior) {
        if (!j.contains("radius_mm")) throw error(errc::config, where + ": radius_mm is required");
        l.radius = get_or<double>(j, "radius_mm", 0.0, where) * 1e-3;
    }
    l.eps_r = get_or<double>(j, "eps_r", 1.0, where);
    l.sigma = get_or<double>(j, "sigma", 0.0, where);
    l.mu_r = get_or<double>(j, "mu_r", 1.0, where);
    l.low_eps_ok = get_or<bool>(j, "low_eps_ok", false, where);
    return l;
}

inline std::vector<double> parse_frequencies(const json& j)
{
    std::vector<double> f;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw error(errc::config, "frequencies: numbers expected");
            f.push_back(v.get<double>());
        }
    } else {
        reject_unknown(j, "frequencies", {"start", "stop", "count", "spacing"});
        const double a = positive(get_or<double>(j, "start", 0.0, "frequencies"), "frequencies.start");
        const double b = positive(get_or<double>(j, "stop", 0.0, "frequencies"), "frequencies.stop");
        const int n = get_or<int>(j, "count", 0, "frequencies");
        const std::string sp = get_or<std::string>(j, "spacing", "linear", "frequencies");
        if (n < 1 || (n == 1 && a != b)) throw error(errc::config, "frequencies.count must be >= 1");
        if (sp != "linear" && sp != "log") throw error(errc::config, "frequencies.spacing must be linear or log");
        for (int k = 0; k < n; ++k) {
            const double t = n == 1 ? 0.0 : double(k) / (n - 1);
            f.push_back(sp == "log" ? a * std::pow(b / a, t) : a + (b - a) * t);
        }
    }
    if (f.empty()) throw error(errc::config, "empty frequency list");
    for (std::size_t k = 0; k < f.size(); ++k) {
        positive(f[k], "frequency");
        if (k > 0 && !(f[k] > f[k - 1])) throw error(errc::config, "frequencies must be strictly increasing");
    }
    return f;
}

} // namespace detail

inline run_config parse_config(const std::string& text)
{
    using detail::get_or;
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw error(errc::config, std::string("JSON parse error: ") + e.what());
    }
    detail::reject_unknown(j, "config", {"analysis", "cable", "frequencies", "modes", "impedance", "currents",
                                         "pulse", "sweep", "output_dir"});
    run_config c;
    c.canonical = j.dump();
    c.analysis = get_or<std::string>(j, "analysis", "", "config");
    if (!c.analysis.empty() && c.analysis != "modes" && c.analysis != "impedance" && c.analysis != "currents" &&
        c.analysis != "pulse")
        throw error(errc::config, "analysis must be one of modes, impedance, currents, pulse");

    if (!j.contains("cable")) throw error(errc::config, "cable is required");
    const json& cj = j["cable"];
    detail::reject_unknown(cj, "cable", {"layers", "exterior"});
    if (!cj.contains("layers") || !cj["layers"].is_array() || cj["layers"].empty())
        throw error(errc::config, "cable.layers must be a non-empty array");
    for (std::size_t i = 0; i < cj["layers"].size(); ++i)
        c.cable.layers.push_back(detail::parse_layer(cj["layers"][i], "cable.layers[" + std::to_string(i) + "]", false));
    c.cable.exterior = cj.contains("exterior") ? detail::parse_layer(cj["exterior"], "cable.exterior", true)
                                               : layer{"exterior", 0.0, 1.0, 0.0, 1.0, false};
    try {
        c.cable.validate();
    } catch (const error& e) {
        throw error(errc::config, e.what());
    }

    if (!j.contains("frequencies")) throw error(errc::config, "frequencies is required");
    c.frequencies = detail::parse_frequencies(j["frequencies"]);

    if (j.contains("modes")) {
        const json& m = j["modes"];
        detail::reject_unknown(m, "modes", {"windows", "residual_tolerance", "max_jump"});
        if (m.contains("windows")) {
            if (!m["windows"].is_array()) throw error(errc::config, "modes.windows must be an array");
            for (std::size_t i = 0; i < m["windows"].size(); ++i) {
                const json& w = m["windows"][i];
                const std::string where = "modes.windows[" + std::to_string(i) + "]";
                detail::reject_unknown(w, where, {"label", "re_lo", "re_hi", "im_lo_db", "im_hi_db", "nx", "ny"});
                mode_window mw;
                mw.label = get_or<std::string>(w, "label", "C" + std::to_string(i + 1), where);
                mw.re_lo = get_or<double>(w, "re_lo", 0.0, where);
                mw.re_hi = get_or<double>(w, "re_hi", 0.0, where);
                mw.im_lo_db = get_or<double>(w, "im_lo_db", 0.0, where);
                mw.im_hi_db = get_or<double>(w, "im_hi_db", 0.0, where);
                mw.nx = get_or<int>(w, "nx", 2, where);
                mw.ny = get_or<int>(w, "ny", 2, where);
                if (!(mw.re_hi > mw.re_lo) || !(mw.im_hi_db > mw.im_lo_db) || mw.im_lo_db < 0.0 || mw.nx < 1 || mw.ny < 1)
                    throw error(errc::config, where + ": empty or invalid window");
                c.windows.push_back(mw);
            }
        }
        c.search.residual_tolerance = get_or<double>(m, "residual_tolerance", c.search.residual_tolerance, "modes");
        c.trace.max_jump = get_or<double>(m, "max_jump", c.trace.max_jump, "modes");
    }
    c.trace.search = c.search;

    if (j.contains("impedance")) {
        const json& m = j["impedance"];
        detail::reject_unknown(m, "impedance", {"rho_L_mm", "residual_tolerance", "scaled", "precondition"});
        c.rho_L = get_or<double>(m, "rho_L_mm", c.rho_L * 1e3, "impedance") * 1e-3;
        c.imp.residual_tolerance = get_or<double>(m, "residual_tolerance", c.imp.residual_tolerance, "impedance");
        c.imp.scaled = get_or<bool>(m, "scaled", true, "impedance");
        c.imp.precondition = get_or<bool>(m, "precondition", true, "impedance");
    }

    if (j.contains("currents")) {
        const json& m = j["currents"];
        detail::reject_unknown(m, "currents", {"z_m", "branch", "asymptotic", "upper_bound", "calibrate"});
        c.z_m = get_or<std::vector<double>>(m, "z_m", {}, "currents");
        for (double z : c.z_m)
            if (!(z > 0.0) || !std::isfinite(z)) throw error(errc::config, "currents.z_m entries must be positive");
        c.branch = get_or<bool>(m, "branch", true, "currents");
        c.asymptotic = get_or<bool>(m, "asymptotic", true, "currents");
        c.upper_bound = get_or<bool>(m, "upper_bound", true, "currents");
        c.calibrate = get_or<bool>(m, "calibrate", false, "currents");
    }

    if (j.contains("pulse")) {
        const json& m = j["pulse"];
        detail::reject_unknown(m, "pulse", {"grid", "z_m", "r_load", "window", "dc", "input", "mode_window",
                                            "seed_frequency", "currents", "currents_fmax"});
        if (m.contains("grid")) {
            const json& g = m["grid"];
            detail::reject_unknown(g, "pulse.grid", {"n_fft", "f_nyquist"});
            try {
                c.grid = frequency_grid::make(get_or<std::size_t>(g, "n_fft", 2048, "pulse.grid"),
                                              get_or<double>(g, "f_nyquist", 102400.0, "pulse.grid"));
            } catch (const error& e) {
                throw error(errc::config, e.what());
            }
        }
        c.pulse_z = get_or<double>(m, "z_m", c.pulse_z, "pulse");
        if (!(c.pulse_z >= 0.0)) throw error(errc::config, "pulse.z_m must be >= 0");
        c.r_load = detail::positive(get_or<double>(m, "r_load", c.r_load, "pulse"), "pulse.r_load");
        if (m.contains("window")) {
            const json& w = m["window"];
            detail::reject_unknown(w, "pulse.window", {"kind", "taper", "f_max"});
            const std::string k = get_or<std::string>(w, "kind", "tukey", "pulse.window");
            if (k == "tukey") c.window.kind = window_kind::tukey;
            else if (k == "hann") c.window.kind = window_kind::hann;
            else if (k == "rectangular") c.window.kind = window_kind::rectangular;
            else throw error(errc::config, "pulse.window.kind must be tukey, hann or rectangular");
            c.window.taper = get_or<double>(w, "taper", 0.25, "pulse.window");
            c.window.f_max = get_or<double>(w, "f_max", 0.0, "pulse.window");
            if (!(c.window.taper >= 0.0 && c.window.taper <= 1.0)) throw error(errc::config, "pulse.window.taper in [0, 1]");
        }
        const std::string dc = get_or<std::string>(m, "dc", "limit", "pulse");
        if (dc == "limit") c.dc = dc_policy::limit;
        else if (dc == "quadratic") c.dc = dc_policy::quadratic;
        else throw error(errc::config, "pulse.dc must be limit or quadratic");
        if (m.contains("input")) {
            const json& in = m["input"];
            detail::reject_unknown(in, "pulse.input", {"amplitude_A", "width_us", "rise_us", "start_us", "csv"});
            c.input.amplitude = get_or<double>(in, "amplitude_A", 1.0, "pulse.input");
            c.input.width = get_or<double>(in, "width_us", 250.0, "pulse.input") * 1e-6;
            c.input.rise = get_or<double>(in, "rise_us", 250.0, "pulse.input") * 1e-6;
            c.input.start = get_or<double>(in, "start_us", 0.0, "pulse.input") * 1e-6;
            c.input.csv = get_or<std::string>(in, "csv", "", "pulse.input");
            if (!(c.input.rise > 0.0) || !(c.input.width >= c.input.rise))
                throw error(errc::config, "pulse.input needs rise_us > 0 and width_us >= rise_us");
        }
        c.pulse_mode = get_or<std::size_t>(m, "mode_window", 0, "pulse");
        c.seed_frequency = get_or<double>(m, "seed_frequency", 0.0, "pulse");
        const std::string cur = get_or<std::string>(m, "currents", "dominant", "pulse");
        if (cur != "dominant" && cur != "all") throw error(errc::config, "pulse.currents must be dominant or all");
        c.all_currents = cur == "all";
        c.currents_fmax = get_or<double>(m, "currents_fmax", c.currents_fmax, "pulse");
    }

    if (j.contains("sweep")) {
        const json& m = j["sweep"];
        detail::reject_unknown(m, "sweep", {"threads", "chunk"});
        c.threads = get_or<unsigned>(m, "threads", 1u, "sweep");
        c.chunk = get_or<std::size_t>(m, "chunk", 32, "sweep");
        if (c.threads < 1 || c.chunk < 1) throw error(errc::config, "sweep.threads and sweep.chunk must be >= 1");
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, "config");
    return c;
}

inline run_config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw error(errc::config, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace coaxdisp

#endif
