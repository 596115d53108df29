#include "vplab/errors.hpp"
#include "vplab/experiment.hpp"

#include "doctest.h"
#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vplab;
namespace fs = std::filesystem;

namespace {

RawConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return RawConfig::parse(in);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vplab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.starts_with("#")) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(std::move(cells));
    }
    return rows;
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("VPLAB_CLI");
    if (!cli) return -1;
    const int rc = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kSmallClt =
    "[experiment]\nkind = clt\nname = small\nseed = 3\nreplicas = 200\n\n"
    "[profile]\nfamily = band-periodic\nn = 30\nband = 3\n\n"
    "[ensemble]\nkind = symmetric\nlaw = gaussian\n\n[sweep]\nk = 2, 3\n";

}  // namespace

TEST_CASE("RawConfig parsing") {
    const auto raw = parse_text("# comment\n[experiment]\nkind = clt\n\n[profile]\nn = 40\nfamily=all-ones\n");
    CHECK(raw.get("experiment.kind") == "clt");
    CHECK(raw.get("profile.n") == "40");
    CHECK(raw.line_of("profile.n") == 6);
    CHECK(raw.line_of("profile.missing") == 0);
    CHECK_THROWS_AS(parse_text("[experiment]\nthis line has no equals sign\n"), ConfigError);
}

TEST_CASE("config hash") {
    const auto a = parse_text("[experiment]\nkind = clt\nseed = 1\n[profile]\nn = 40\n");
    const auto b = parse_text("[profile]\nn = 40\n[experiment]\nseed = 1\nkind = clt\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash_hex().size() == 16);
    CHECK(parse_text(a.canonical()).hash() == a.hash());

    auto moved = a;
    moved.set("experiment.out", "/somewhere/else");
    moved.set("experiment.workers", "3");
    CHECK(moved.hash() == a.hash());
    auto reseeded = a;
    reseeded.set("experiment.seed", "2");
    CHECK(reseeded.hash() != a.hash());
}

TEST_CASE("parse_experiment diagnostics") {
    const auto cfg = parse_experiment(parse_text(kSmallClt));
    CHECK(cfg.kind == ExperimentKind::clt);
    CHECK(cfg.replicas == 200);
    CHECK(cfg.ks == std::vector<std::size_t>{2, 3});
    CHECK(cfg.polynomial(3).coeffs() == std::vector<double>{0, 0, 0, 1});

    try {
        parse_experiment(parse_text("[experiment]\nkind = clt\n\n[ensemble]\nlaw = cauchy\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 5);
        CHECK(e.field() == "ensemble.law");
    }
    CHECK_THROWS_AS(parse_experiment(parse_text("[experiment]\nkind = clt\nbogus = 1\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(parse_text("[experiment]\nkind = nonsense\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(parse_text("[experiment]\nkind = clt\nreplicas = -4\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(parse_text("[experiment]\nkind = clt\n[profile]\nn = 0\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(parse_text("[experiment]\nkind = variance-check\n[ensemble]\nlaw = uniform01\n"
                                                "kind = iid\n")),
                    ConfigError);
}

TEST_CASE("build_profile") {
    ProfileSpec spec;
    spec.family = "band-periodic";
    spec.n = 400;
    spec.band_exponent = 0.8;
    const auto band = build_profile(spec);
    CHECK(band.rows() == 400);
    // ceil(400^0.8) = 121, so every row of the periodic band has 243 ones.
    CHECK(band.dense().row(0).sum() == 243);
    spec.family = "nope";
    CHECK_THROWS(build_profile(spec));
}

TEST_CASE("presets") {
    CHECK(presets().size() >= 14);
    for (const auto& p : presets()) {
        CAPTURE(p.name);
        CHECK_NOTHROW(parse_experiment(preset_config(p.name)));
        CHECK_FALSE(p.description.empty());
    }
    for (const char* name : {"corollary-3.1", "corollary-3.8", "remark-4.2-i", "remark-4.2-ii", "remark-4.2-iii",
                             "remark-4.3", "corollary-3.4-band"})
        CHECK_NOTHROW(preset_config(name));
    const auto band = preset_config("corollary-3.4-band");
    CHECK(band.get("profile.n") == "400");
    CHECK(band.get("profile.band") == "80");
    CHECK(band.get("sweep.k") == "2");
    CHECK(preset_config("corollary-3.4").get("experiment.name") == "corollary-3.4-band");
    CHECK_THROWS_AS(preset_config("theorem-2.1"), ConfigError);
    CHECK_THROWS_AS(preset_config("corollary-9"), ConfigError);
    CHECK_THROWS_AS(preset_config("remark-4.2-ii", 0), ConfigError);

    const auto moved = preset_config("remark-4.2-ii", 100, 9, "elsewhere");
    CHECK(moved.get("profile.n") == "100");
    CHECK(moved.get("experiment.seed") == "9");
    CHECK(moved.get("experiment.out") == "elsewhere");
}

TEST_CASE("sweep_bound") {
    auto rows = csv_rows(sweep_bound(parse_experiment(preset_config("theorem-2.1-sweep"))));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"n", "k", "max_a", "b_n", "s_k", "rhs"});
    for (std::size_t i = 2; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][5]) / std::stod(rows[i - 1][5]) == doctest::Approx(0.5).epsilon(0.02));

    // rhs ~ sqrt(n) b_n / (n b_n) for bands of width n^0.8.
    rows = csv_rows(sweep_bound(parse_experiment(preset_config("theorem-2.1-band-sweep"))));
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 2; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][5]) / std::stod(rows[i - 1][5]) == doctest::Approx(0.5).epsilon(0.05));

    auto raw = parse_text("[experiment]\nkind = bound-sweep\n[profile]\nfamily = remark42-ii\n[sweep]\nk = 3\n"
                          "n = 10, 20, 40\n");
    rows = csv_rows(sweep_bound(parse_experiment(raw)));
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][5] == "vacuous");
}

TEST_CASE("run_experiment writes stamped artifacts") {
    const auto dir = scratch("r42");
    auto raw = preset_config("remark-4.2-ii", std::nullopt, std::nullopt, dir.string());
    const auto cfg = parse_experiment(raw);
    std::ostringstream log;
    const auto res = run_experiment(cfg, log);
    CHECK(res.status == 0);
    CHECK(res.failures.empty());
    const std::string stamp = "# vplab 0.1.0 config=" + raw.hash_hex();
    const auto table = slurp(dir / "structural_zero.csv");
    CHECK(table.starts_with(stamp + "\n"));
    const auto rows = csv_rows(table);
    REQUIRE(rows.size() == 8);
    for (std::size_t k = 1; k <= 7; ++k) CHECK(rows[k][2] == (k == 5 ? "false" : "true"));
    const auto status = nlohmann::json::parse(slurp(dir / "status.json"));
    CHECK(status["config_hash"] == raw.hash_hex());
    CHECK(status["version"] == "vplab 0.1.0");
    CHECK(status["status"] == "ok");
    CHECK(parse_text(slurp(dir / "config.ini")).hash() == raw.hash());
    fs::remove_all(dir);
}

TEST_CASE("wrong expectations are invariant failures") {
    const auto dir = scratch("r42bad");
    auto raw = preset_config("remark-4.2-ii", std::nullopt, std::nullopt, dir.string());
    raw.set("structural.expect_constant", "5");
    raw.set("structural.expect_varying", "1");
    std::ostringstream log;
    const auto res = run_experiment(parse_experiment(raw), log);
    CHECK(res.status == 1);
    CHECK(res.failures.size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("outputs are reproducible across directories and worker counts") {
    const auto d1 = scratch("rep1");
    const auto d2 = scratch("rep2");
    auto r1 = parse_text(kSmallClt);
    r1.set("experiment.out", d1.string());
    r1.set("experiment.workers", "1");
    auto r2 = r1;
    r2.set("experiment.out", d2.string());
    r2.set("experiment.workers", "3");
    std::ostringstream log;
    const auto a = run_experiment(parse_experiment(r1), log);
    const auto b = run_experiment(parse_experiment(r2), log);
    REQUIRE(a.status == 0);
    REQUIRE(a.files.size() == b.files.size());
    for (const auto& f : a.files) {
        const auto name = fs::path(f).filename();
        // config.ini records the output directory and worker count verbatim.
        if (name == "config.ini") continue;
        CAPTURE(name);
        CHECK(slurp(d1 / name) == slurp(d2 / name));
    }
    CHECK(fs::exists(d1 / "batch_k2.csv"));
    CHECK(fs::exists(d1 / "gof_k3.json"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("cli exit codes") {
    if (!std::getenv("VPLAB_CLI")) {
        MESSAGE("VPLAB_CLI not set, skipping");
        return;
    }
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    CHECK(run_cli("list-presets") == 0);
    CHECK(run_cli("preset remark-4.2-ii --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "structural_zero.csv"));
    CHECK(run_cli("preset no-such-preset") == 2);
    CHECK(run_cli("preset theorem-2.1") == 2);
    CHECK(run_cli("") == 2);

    std::ofstream(dir / "bad.ini") << "[experiment]\nkind = clt\n[ensemble]\nlaw = cauchy\n";
    CHECK(run_cli("run " + (dir / "bad.ini").string()) == 2);
    CHECK(run_cli("run " + (dir / "missing.ini").string()) == 3);

    std::ofstream(dir / "fail.ini") << "[experiment]\nkind = structural-zero\nout = " << (dir / "fail").string()
                                    << "\n[profile]\nfamily = remark42-ii\nn = 20\n[sweep]\nk = 3\n"
                                       "[structural]\nexpect_varying = 3\n";
    CHECK(run_cli("run " + (dir / "fail.ini").string()) == 1);
    CHECK(run_cli("preset remark-4.2-ii --out /proc/vplab") == 3);
    fs::remove_all(dir);
}
