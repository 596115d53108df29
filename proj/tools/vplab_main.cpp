#include "vplab/errors.hpp"
#include "vplab/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

// Exit codes: 0 ok, 1 invariant failure, 2 malformed config or usage, 3 I/O error.
int execute(const vplab::RawConfig& raw) {
    vplab::ExperimentConfig cfg;
    try {
        cfg = vplab::parse_experiment(raw);
    } catch (const vplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const vplab::RunResult r = vplab::run_experiment(cfg, std::cout);
        for (const auto& f : r.failures) std::cerr << "FAIL: " << f << '\n';
        std::cout << "wrote " << r.files.size() << " files to " << cfg.out << '\n';
        return r.status;
    } catch (const vplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(vplab::kVersion) + ": variance-profile random matrix experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from an INI config");
    run->add_option("config", config_path, "config file")->required();

    std::string preset_name;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    auto* preset = app.add_subcommand("preset", "run a named preset");
    preset->add_option("name", preset_name, "preset name or unique prefix")->required();
    preset->add_option("--n", n, "matrix dimension");
    preset->add_option("--seed", seed, "experiment seed");
    preset->add_option("--out", out, "output directory");

    auto* list = app.add_subcommand("list-presets", "print preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*list) {
            for (const auto& p : vplab::presets()) std::cout << p.name << "  " << p.description << '\n';
            return 0;
        }
        if (*run) return execute(vplab::RawConfig::load(config_path));
        return execute(vplab::preset_config(preset_name, n, seed, out));
    } catch (const vplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
