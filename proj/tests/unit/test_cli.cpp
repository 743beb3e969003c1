#include <coaxdisp/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace coaxdisp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json bundled(const std::string& name) { return nlohmann::json::parse(slurp(fs::path(COAXDISP_CONFIG_DIR) / name)); }

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("coaxdisp_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j)
{
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(COAXDISP_EXE) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

errc config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const error& e) {
        return e.code();
    }
    return errc::non_finite;
}

} // namespace

TEST(Config, BundledConfigsParse)
{
    for (const char* n : {"cable_modes.json", "cable_impedance.json", "cable_currents.json", "cable_pulse.json"}) {
        const auto c = load_config((fs::path(COAXDISP_CONFIG_DIR) / n).string());
        EXPECT_EQ(c.cable.size(), 11u) << n;
        EXPECT_FALSE(c.windows.empty()) << n;
    }
    const auto c = load_config((fs::path(COAXDISP_CONFIG_DIR) / "cable_modes.json").string());
    const auto ref = reference_cable();
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_DOUBLE_EQ(c.cable.layers[i].radius, ref.layers[i].radius);
        EXPECT_DOUBLE_EQ(c.cable.layers[i].sigma, ref.layers[i].sigma);
        EXPECT_DOUBLE_EQ(c.cable.layers[i].eps_r, ref.layers[i].eps_r);
        EXPECT_DOUBLE_EQ(c.cable.layers[i].mu_r, ref.layers[i].mu_r);
    }
}

TEST(Config, UnknownKeysAreRejected)
{
    auto j = bundled("cable_modes.json");
    j["tolerance"] = 1;
    EXPECT_EQ(config_error(j.dump()), errc::config);
    j = bundled("cable_modes.json");
    j["cable"]["layers"][0]["radius"] = 1;
    EXPECT_EQ(config_error(j.dump()), errc::config);
    j = bundled("cable_modes.json");
    j["modes"]["windows"][0]["re_low"] = 1;
    EXPECT_EQ(config_error(j.dump()), errc::config);
}

TEST(Config, InvalidValuesAreRejected)
{
    auto j = bundled("cable_modes.json");
    j["frequencies"] = nlohmann::json::array();
    EXPECT_EQ(config_error(j.dump()), errc::config);
    j["frequencies"] = {300, 200};
    EXPECT_EQ(config_error(j.dump()), errc::config);
    j = bundled("cable_modes.json");
    j["cable"]["layers"][3]["radius_mm"] = 20.0;
    EXPECT_EQ(config_error(j.dump()), errc::config);
    j = bundled("cable_modes.json");
    j["pulse"] = {{"grid", {{"n_fft", 1000}}}};
    EXPECT_EQ(config_error(j.dump()), errc::config);
    EXPECT_EQ(config_error("{not json"), errc::config);
}

TEST(Config, FrequencyRanges)
{
    auto j = bundled("cable_modes.json");
    j["frequencies"] = {{"start", 100}, {"stop", 10000}, {"count", 3}, {"spacing", "log"}};
    const auto c = parse_config(j.dump());
    ASSERT_EQ(c.frequencies.size(), 3u);
    EXPECT_NEAR(c.frequencies[1], 1000.0, 1e-9);
}

TEST(Output, DoublesRoundTripThroughCsvText)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 10000) {
        const std::uint64_t b = bits(rng);
        double x;
        std::memcpy(&x, &b, sizeof x);
        if (!std::isfinite(x)) continue;
        const std::string s = format_double(x);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        ASSERT_EQ(std::memcmp(&x, &y, sizeof x), 0) << s;
        ++checked;
    }
    EXPECT_EQ(format_double(INFINITY), "inf");
    EXPECT_EQ(format_double(NAN), "nan");
}

TEST(Output, CsvHeaderCarriesConfigHash)
{
    const table t{"x", {"a", "b"}, {{1.5, std::string("p,q")}, {2LL, std::string("r")}}};
    const std::string s = to_csv(t, "modes", "{}");
    EXPECT_EQ(s, "# coaxdisp modes config_fnv1a=" + hash_hex(fnv1a("{}")) + "\na,b\n1.5,\"p,q\"\n2,r\n");
    EXPECT_EQ(hash_hex(fnv1a("")), "cbf29ce484222325");
}

TEST(Command, ModesAtOneFiftyHertzGivesTwoRows)
{
    const auto c = load_config((fs::path(COAXDISP_CONFIG_DIR) / "cable_modes.json").string());
    const auto r = cmd_modes(c);
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(r.tables.size(), 1u);
    const auto& t = r.tables[0];
    EXPECT_EQ(t.columns, (std::vector<std::string>{"f_Hz", "mode_index", "re_alpha_over_k0", "im_alpha_dB_per_100km", "residual"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(std::get<long long>(t.rows[0][1]), 1);
    EXPECT_EQ(std::get<long long>(t.rows[1][1]), 2);
    EXPECT_NEAR(std::get<double>(t.rows[0][2]), 2.42375, 1e-5);
    EXPECT_NEAR(std::get<double>(t.rows[1][2]), 1.03679, 1e-5);
}

TEST(Command, ExitCodes)
{
    const auto d = scratch("exit");
    auto j = bundled("cable_modes.json");
    j["output_dir"] = (d / "out").string();
    EXPECT_EQ(run("modes --config " + write_config(d, j).string()), 0);

    j["frequencies"] = nlohmann::json::array();
    EXPECT_EQ(run("modes --config " + write_config(d, j).string()), 2);
    EXPECT_EQ(run("modes --config " + (d / "missing.json").string()), 2);
    EXPECT_EQ(run("modes"), 2);
    EXPECT_EQ(run("impedance --config " + (fs::path(COAXDISP_CONFIG_DIR) / "cable_modes.json").string()), 2); // analysis mismatch

    // a window without a pole is a numerical failure with a detail file
    j = bundled("cable_modes.json");
    j["output_dir"] = (d / "bad").string();
    j["modes"]["windows"][1] = {{"label", "empty"}, {"re_lo", 5.0}, {"re_hi", 6.0}, {"im_lo_db", 0.1}, {"im_hi_db", 0.2}};
    EXPECT_EQ(run("modes --config " + write_config(d, j).string()), 3);
    EXPECT_TRUE(fs::exists(d / "bad" / "modes_failures.csv"));
    EXPECT_TRUE(fs::exists(d / "bad" / "modes.csv"));
}

TEST(Command, RerunIsByteIdentical)
{
    const auto d = scratch("rerun");
    auto j = bundled("cable_modes.json");
    j["frequencies"] = {150, 200, 300};
    j["output_dir"] = (d / "a").string();
    const auto cfg = write_config(d, j);
    ASSERT_EQ(run("modes --config " + cfg.string()), 0);
    ASSERT_EQ(run("modes --config " + cfg.string() + " --out " + (d / "b").string() + " --threads 3"), 0);
    const std::string a = slurp(d / "a" / "modes.csv"), b = slurp(d / "b" / "modes.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind("# coaxdisp modes config_fnv1a=", 0), 0u);
    ASSERT_EQ(run("modes --config " + cfg.string() + " --out " + (d / "j").string() + " --format json"), 0);
    const auto js = nlohmann::json::parse(slurp(d / "j" / "modes.json"));
    EXPECT_EQ(js["rows"].size(), 6u);
}

TEST(Command, PulseCurrentsMatchSpectralModule)
{
    auto j = bundled("cable_pulse.json");
    j["modes"] = bundled("cable_modes.json")["modes"];
    j["frequencies"] = {150};
    j["pulse"]["grid"] = {{"n_fft", 64}, {"f_nyquist", 3200}};
    j["pulse"]["currents"] = "all";
    j["pulse"]["currents_fmax"] = 450;
    const auto c = parse_config(j.dump());
    const auto out = run_pulse(c);
    ASSERT_TRUE(out.result.ok());
    const auto& ts = out.result.tables[1];
    ASSERT_EQ(ts.columns.back(), "abs_Ibr_A");
    // bin 3 is 300 Hz
    const auto& row = ts.rows[3];
    ASSERT_DOUBLE_EQ(std::get<double>(row[0]), 300.0);
    const spectral_context ctx(c.cable, 300.0);
    std::vector<mode_solution> ms;
    for (const auto& w : c.windows) {
        sweep_plan sp;
        sp.seed = w.region();
        sp.seed_freq = 150.0;
        sp.impedance = false;
        ms.push_back(sweep(c.cable, {100.0, 200.0, 300.0}, sp)[2].mode);
    }
    const cplx M = calibrate_M(ctx, ms, out.run.bins[3].i_in, 1.0, false).M;
    const double i1 = std::abs(residue_current(ctx, ms[0], M) * std::exp(I * ms[0].alpha * c.pulse_z));
    const double i2 = std::abs(residue_current(ctx, ms[1], M) * std::exp(I * ms[1].alpha * c.pulse_z));
    const double ibr = std::abs(branch_current(ctx, M, c.pulse_z).value);
    const std::size_t n = ts.columns.size();
    EXPECT_NEAR(std::get<double>(row[n - 3]) / i1, 1.0, 1e-9);
    EXPECT_NEAR(std::get<double>(row[n - 2]) / i2, 1.0, 1e-9);
    EXPECT_NEAR(std::get<double>(row[n - 1]) / ibr, 1.0, 1e-9);
    // above currents_fmax the columns are empty
    EXPECT_TRUE(std::isnan(std::get<double>(ts.rows[10][n - 1])));
}
