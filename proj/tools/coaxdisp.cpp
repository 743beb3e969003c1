// Command-line front end: coaxdisp <modes|impedance|currents|pulse|selftest> --config FILE
#include <coaxdisp/cli.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>

namespace {

using namespace coaxdisp;

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct options {
    std::string config;
    std::string out;
    unsigned threads = 0;
    bool verbose = false;
    std::string format = "csv";
};

int selftest(bool verbose)
{
    int failed = 0;
    auto check = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        failed += ok ? 0 : 1;
    };
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> re(-50.0, 50.0), im(0.0, 20.0);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const cplx z(re(rng), im(rng));
            if (std::abs(z) < 1e-3) continue;
            worst = std::max(worst, std::abs(bessel::wronskian_defect(z)) / std::abs(4.0 / (constants::pi * z)));
        }
        check("wronskian", worst < 1e-10, "max relative defect " + format_double(worst));
    }
    try {
        const auto cable = reference_cable();
        const auto pole = seed_pole(cable, 150.0, {2.0, 3.0, 1.0 / constants::db_per_100km, 4.0 / constants::db_per_100km, 2, 2});
        spectral_context ctx(cable, 150.0);
        const double n = pole.alpha.real() / ctx.k0;
        check("quasi-TEM pole at 150 Hz", pole.residual < 1e-6 && n > 2.0 && n < 3.0,
              "Re alpha/k0 = " + format_double(n) + ", residual " + format_double(pole.residual));
        const auto z = characteristic_impedance(ctx, pole.alpha);
        check("impedance at 150 Hz", z.z.real() > 1.0 && z.z.real() < 100.0,
              "Z = " + format_double(z.z.real()) + " + " + format_double(z.z.imag()) + "i ohm");
    } catch (const std::exception& e) {
        check("quasi-TEM pole at 150 Hz", false, e.what());
    }
    {
        const auto g = frequency_grid::make(256, 1000.0);
        std::vector<double> v(g.n_fft);
        for (std::size_t n = 0; n < v.size(); ++n) v[n] = std::sin(0.1 * n) * std::exp(-0.01 * n);
        const auto back = synthesize_pulse(analyze(v, g), g, {window_kind::rectangular, 0.0, 0.0});
        double err = 0.0;
        for (std::size_t n = 0; n < v.size(); ++n) err = std::max(err, std::abs(back.v[n] - v[n]));
        check("fft roundtrip", err < 1e-12, "max error " + format_double(err));
    }
    if (verbose) std::fprintf(stderr, "selftest: %d failed\n", failed);
    return failed ? exit_numeric : 0;
}

int run(const std::string& command, const options& o)
{
    logger log;
    if (o.verbose) log = [](const std::string& m) { std::fprintf(stderr, "[coaxdisp] %s\n", m.c_str()); };
    run_config cfg;
    try {
        cfg = load_config(o.config);
        if (!cfg.analysis.empty() && cfg.analysis != command)
            throw error(errc::config, "config analysis '" + cfg.analysis + "' does not match subcommand '" + command + "'");
        if (o.threads > 0) cfg.threads = o.threads;
        if (!o.out.empty()) cfg.output_dir = o.out;
    } catch (const error& e) {
        std::fprintf(stderr, "coaxdisp: %s\n", e.what());
        return exit_config;
    }
    const auto t0 = std::chrono::steady_clock::now();
    command_result res;
    try {
        if (command == "modes") res = cmd_modes(cfg, log);
        else if (command == "impedance") res = cmd_impedance(cfg, log);
        else if (command == "currents") res = cmd_currents(cfg, log);
        else res = cmd_pulse(cfg, log);
    } catch (const error& e) {
        std::fprintf(stderr, "coaxdisp: %s\n", e.what());
        const bool cfg_error = e.code() == errc::config || e.code() == errc::grid_mismatch || e.code() == errc::invalid_model;
        return cfg_error ? exit_config : exit_numeric;
    }
    for (const auto& n : res.notes) std::fprintf(stderr, "coaxdisp: %s\n", n.c_str());
    std::vector<std::string> files;
    try {
        files = write_outputs(res, command, cfg, cfg.output_dir, o.format == "json");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "coaxdisp: %s\n", e.what());
        return exit_config;
    }
    if (o.verbose) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& f : files) std::fprintf(stderr, "[coaxdisp] wrote %s\n", f.c_str());
        std::fprintf(stderr, "[coaxdisp] %s finished in %.2f s\n", command.c_str(), s);
    }
    if (!res.ok()) {
        std::fprintf(stderr, "coaxdisp: %zu failure(s), see %s_failures\n", res.failures.rows.size(), command.c_str());
        return exit_numeric;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dispersion, impedance, spectral currents and pulse propagation of open coaxial cables"};
    app.require_subcommand(1);
    options o;
    const char* names[] = {"modes", "impedance", "currents", "pulse"};
    const char* help[] = {"locate and trace poles in the configured windows", "characteristic impedance of traced modes",
                          "modal and branch-cut conductor currents", "time-domain pulse at distance z"};
    std::vector<CLI::App*> subs;
    for (int i = 0; i < 4; ++i) {
        auto* s = app.add_subcommand(names[i], help[i]);
        s->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "output directory (overrides output_dir)");
        s->add_option("--threads", o.threads, "worker threads for frequency sweeps")->check(CLI::PositiveNumber);
        s->add_flag("--verbose", o.verbose, "progress on stderr");
        s->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        subs.push_back(s);
    }
    auto* st = app.add_subcommand("selftest", "quick numerical self checks");
    st->add_flag("--verbose", o.verbose, "summary on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }
    if (st->parsed()) return selftest(o.verbose);
    for (int i = 0; i < 4; ++i)
        if (subs[i]->parsed()) return run(names[i], o);
    return exit_config;
}
