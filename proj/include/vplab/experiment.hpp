#pragma once

#include "vplab/embeddings.hpp"
#include "vplab/entrylaws.hpp"
#include "vplab/gof.hpp"
#include "vplab/profiles.hpp"
#include "vplab/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vplab {

inline constexpr std::string_view kVersion = "vplab 0.1.0";

enum class ExperimentKind {
    clt,
    bound_sweep,
    norm_check,
    variance_check,
    cycle_oracle,
    embedding,
    er_concentration,
    structural_zero,
};

std::string_view to_string(ExperimentKind kind);

/// Flat "section.key" -> value view of an INI config. The config hash is
/// FNV-1a over the canonical dump (sorted keys) without experiment.out and
/// experiment.workers.
class RawConfig {
public:
    static RawConfig parse(std::istream& in);
    static RawConfig load(const std::string& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void erase(const std::string& key) { values_.erase(key); }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const { return values_.at(key); }
    const std::map<std::string, std::string>& values() const { return values_; }
    /// Source line of a key, 0 when unknown or set programmatically.
    long line_of(const std::string& key) const;

    /// INI text with one section per prefix, keys sorted.
    std::string canonical() const;
    std::uint64_t hash() const;
    std::string hash_hex() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, long> lines_;
};

struct ProfileSpec {
    std::string family = "all-ones";
    std::size_t n = 100;
    std::size_t band = 1;
    double band_exponent = 0.0;  ///< > 0: band = ceil(n^band_exponent)
    bool periodic = true;
    double c = 0.5;            ///< separable lower bound / block fraction
    double background = 0.0;  ///< block-sparse
    double floor_exponent = 0.2;  ///< bounded-below: floor = n^-exponent
    std::string function = "cosine";  ///< sampled
    double scale = 1.0;
    std::string path;
    ErdosRenyiConfig er;
};

struct ExperimentConfig {
    RawConfig raw;
    ExperimentKind kind = ExperimentKind::clt;
    std::string name = "experiment";
    std::uint64_t seed = 1;
    std::size_t replicas = 1000;
    std::size_t workers = 0;
    std::string out = "out";

    ProfileSpec profile;
    EnsembleKind ensemble = EnsembleKind::symmetric;
    std::string law = "gaussian";
    std::optional<std::vector<double>> coeffs;
    std::vector<std::size_t> ks{2};
    std::vector<std::size_t> ns;  ///< sweep sizes, empty = profile.n only

    std::string embedding_kind = "covariance";
    std::vector<std::size_t> embedding_dims{100, 150};
    std::size_t identity_trials = 100;

    std::size_t norm_trials = 100;
    double norm_t = 2.0;
    double k_cal = 1.0;
    std::optional<double> norm_ratio_max;  ///< bound on ||Y|| / sqrt(b_n)

    BinSpec bins;
    std::optional<double> ks_max;

    std::size_t er_seeds = 100;
    double er_band = 0.1;         ///< |S_k/(np)^k - 1| tolerance
    double er_min_within = 0.99;  ///< required fraction of seeds within the row-sum cap

    std::size_t oracle_cases = 50;
    std::size_t oracle_max_n = 8;
    double oracle_density = 0.4;

    std::size_t structural_trials = 20;
    std::vector<std::size_t> expect_constant;
    std::vector<std::size_t> expect_varying;

    /// Test polynomial for degree k: coeffs when given, else x^k.
    PolynomialSpec polynomial(std::size_t k) const;
};

/// Validates every field before anything runs; ConfigError names the field.
ExperimentConfig parse_experiment(const RawConfig& raw);

StdDevProfile build_profile(const ProfileSpec& spec);

struct RunResult {
    int status = 0;  ///< 0 ok, 1 invariant failure
    std::vector<std::string> files;
    std::vector<std::string> failures;
};

/// Runs the experiment and writes its artifacts under cfg.out.
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Bound sweep as CSV text (header "n,k,max_a,b_n,s_k,rhs"); vacuous rows
/// carry "vacuous" in the rhs column.
std::string sweep_bound(const ExperimentConfig& cfg);

struct Preset {
    std::string name;
    std::string description;
    std::string ini;
};

const std::vector<Preset>& presets();

/// Exact name or unique prefix. Overrides resize the experiment, reseed it,
/// or redirect its output.
RawConfig preset_config(std::string_view name, std::optional<std::size_t> n = std::nullopt,
                        std::optional<std::uint64_t> seed = std::nullopt,
                        std::optional<std::string> out = std::nullopt);

}  // namespace vplab
