#include "vplab/experiment.hpp"

#include "vplab/bounds.hpp"
#include "vplab/cycles.hpp"
#include "vplab/errors.hpp"
#include "vplab/parallel.hpp"
#include "vplab/rng.hpp"

#include "json.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace vplab {

namespace {

const std::set<std::string>& allowed_keys() {
    static const std::set<std::string> keys = {
        "experiment.kind",      "experiment.name",        "experiment.seed",      "experiment.replicas",
        "experiment.workers",   "experiment.out",         "profile.family",       "profile.n",
        "profile.band",         "profile.band_exponent",  "profile.periodic",
        "profile.c",            "profile.background",     "profile.floor_exponent", "profile.function",
        "profile.scale",        "profile.path",           "profile.p",            "profile.gamma",
        "profile.alpha",        "profile.graph_seed",     "ensemble.kind",        "ensemble.law",
        "polynomial.coeffs",    "sweep.k",                "sweep.n",              "embedding.kind",
        "embedding.dims",       "embedding.trials",       "norm.trials",          "norm.t",
        "norm.k_cal",           "norm.ratio_max",         "gof.bins",             "gof.lo",
        "gof.hi",               "gof.ks_max",             "erdos_renyi.seeds",    "erdos_renyi.band",
        "erdos_renyi.min_within", "oracle.cases",         "oracle.max_n",         "oracle.density",
        "structural.trials",    "structural.expect_constant", "structural.expect_varying",
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Typed access with field/line diagnostics.
class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        const long line = raw_.line_of(key);
        std::string what = key + ": " + msg;
        if (line > 0) what = "line " + std::to_string(line) + ": " + what;
        throw ConfigError(what, key, line);
    }

    std::string str(const std::string& key, std::string def) const {
        return raw_.has(key) ? raw_.get(key) : def;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t def) const {
        if (!raw_.has(key)) return def;
        return parse_u64(key, raw_.get(key));
    }

    std::size_t size(const std::string& key, std::size_t def) const {
        return static_cast<std::size_t>(u64(key, def));
    }

    double real(const std::string& key, double def) const {
        if (!raw_.has(key)) return def;
        return parse_real(key, raw_.get(key));
    }

    std::optional<double> opt_real(const std::string& key) const {
        if (!raw_.has(key)) return std::nullopt;
        return parse_real(key, raw_.get(key));
    }

    bool boolean(const std::string& key, bool def) const {
        if (!raw_.has(key)) return def;
        const std::string& v = raw_.get(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        if (!raw_.has(key)) return out;
        std::string_view v = raw_.get(key);
        while (true) {
            const auto comma = v.find(',');
            std::string item = trim(v.substr(0, comma));
            if (item.empty()) fail(key, "empty list element");
            out.push_back(std::move(item));
            if (comma == std::string_view::npos) break;
            v.remove_prefix(comma + 1);
        }
        return out;
    }

    std::vector<std::size_t> sizes(const std::string& key, std::vector<std::size_t> def) const {
        if (!raw_.has(key)) return def;
        std::vector<std::size_t> out;
        for (const auto& item : list(key)) out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
        return out;
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : list(key)) out.push_back(parse_real(key, item));
        return out;
    }

private:
    std::uint64_t parse_u64(const std::string& key, const std::string& v) const {
        std::uint64_t x = 0;
        int base = 10;
        std::string_view s = v;
        if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
            base = 16;
            s.remove_prefix(2);
        }
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x, base);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            fail(key, "expected a non-negative integer, got '" + v + "'");
        return x;
    }

    double parse_real(const std::string& key, const std::string& v) const {
        double x = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x))
            fail(key, "expected a finite number, got '" + v + "'");
        return x;
    }

    const RawConfig& raw_;
};

ExperimentKind kind_from_string(const Reader& rd, const std::string& s) {
    static const std::pair<std::string_view, ExperimentKind> names[] = {
        {"clt", ExperimentKind::clt},
        {"bound-sweep", ExperimentKind::bound_sweep},
        {"norm-check", ExperimentKind::norm_check},
        {"variance-check", ExperimentKind::variance_check},
        {"cycle-oracle", ExperimentKind::cycle_oracle},
        {"embedding", ExperimentKind::embedding},
        {"er-concentration", ExperimentKind::er_concentration},
        {"structural-zero", ExperimentKind::structural_zero},
    };
    for (const auto& [name, k] : names)
        if (name == s) return k;
    rd.fail("experiment.kind", "unknown experiment kind '" + s + "'");
}

EmbeddingPlan make_plan(const ExperimentConfig& cfg, const PolynomialSpec& p) {
    if (cfg.embedding_kind == "covariance")
        return plan_covariance(cfg.embedding_dims.at(0), cfg.embedding_dims.at(1), p);
    return plan_product(cfg.embedding_dims, p);
}

// ---------------------------------------------------------------------------
// Output.

class Artifacts {
public:
    Artifacts(const ExperimentConfig& cfg, RunResult& result) : cfg_(cfg), result_(result) {
        dir_ = cfg.out;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw std::runtime_error("cannot create output directory '" + cfg.out + "'");
        write_raw("config.ini", "# " + std::string(kVersion) + " config=" + cfg.raw.hash_hex() + "\n" +
                                    cfg.raw.canonical());
    }

    void csv(const std::string& name, const std::string& body) {
        write_raw(name, "# " + std::string(kVersion) + " config=" + cfg_.raw.hash_hex() + "\n" + body);
    }

    void json(const std::string& name, const nlohmann::ordered_json& body) {
        nlohmann::ordered_json j;
        j["version"] = std::string(kVersion);
        j["config_hash"] = cfg_.raw.hash_hex();
        j["experiment"] = cfg_.name;
        for (const auto& [key, value] : body.items()) j[key] = value;
        write_raw(name, j.dump(2) + "\n");
    }

    void json(const std::string& name, const std::string& text) {
        json(name, nlohmann::ordered_json::parse(text));
    }

private:
    void write_raw(const std::string& name, const std::string& text) {
        const auto path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        f << text;
        f.close();
        if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        result_.files.push_back(path.string());
    }

    const ExperimentConfig& cfg_;
    RunResult& result_;
    std::filesystem::path dir_;
};

std::string suffix(std::size_t k) { return "_k" + std::to_string(k); }

std::string fmt(double x) { return format_double(x); }

// Z batch plus goodness-of-fit artifacts; records a failure when ks exceeds ks_max.
void emit_batch(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log,
                const SampleBatch& batch, std::size_t k, std::ostringstream& summary) {
    const GofReport gof = gof_suite(batch, cfg.bins);
    std::ostringstream b;
    write_batch_csv(b, batch);
    out.csv("batch" + suffix(k) + ".csv", b.str());
    out.json("batch" + suffix(k) + ".json", batch_json(batch));
    out.json("gof" + suffix(k) + ".json", gof_json(gof));
    std::ostringstream h;
    write_histogram_csv(h, batch.z_samples, cfg.bins);
    out.csv("histogram" + suffix(k) + ".csv", h.str());
    summary << k << ',' << batch.replicas << ',' << fmt(batch.mean_hat) << ',' << fmt(batch.var_hat) << ','
            << fmt(batch.mean_se) << ',' << fmt(batch.var_se) << ',' << fmt(gof.ks) << ',' << fmt(gof.tv_binned)
            << ',' << fmt(gof.w1) << ',' << fmt(gof.floor.ks) << ',' << fmt(gof.floor.tv_binned) << ','
            << fmt(gof.floor.w1) << '\n';
    log << "k=" << k << " ks=" << gof.ks << " tv_binned=" << gof.tv_binned << " w1=" << gof.w1
        << " (floor ks=" << gof.floor.ks << ")\n";
    for (const auto& w : batch.warnings) log << "warning: " << w << '\n';
    if (cfg.ks_max && gof.ks > *cfg.ks_max)
        result.failures.push_back("k=" + std::to_string(k) + ": ks " + fmt(gof.ks) + " exceeds " +
                                  fmt(*cfg.ks_max));
}

constexpr const char* kSummaryHeader =
    "k,replicas,mean_hat,var_hat,mean_se,var_se,ks,tv_binned,w1,ks_floor,tv_floor,w1_floor\n";

void run_clt(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const StdDevProfile a = build_profile(cfg.profile);
    const MatrixEnsemble ens{cfg.ensemble, parse_law(cfg.law), cfg.seed};
    if (!ens.law.theorem_compliant()) log << "warning: " << ens.law.compliance_warning() << '\n';
    std::ostringstream summary;
    summary << kSummaryHeader;
    for (std::size_t k : cfg.ks) {
        try {
            const SampleBatch batch = run_batch(a, ens, cfg.polynomial(k), cfg.replicas, cfg.seed);
            emit_batch(cfg, out, result, log, batch, k, summary);
        } catch (const StructuralZeroVariance& e) {
            result.failures.push_back("k=" + std::to_string(k) + ": " + e.what());
        }
    }
    out.csv("summary.csv", summary.str());
}

void run_bound_sweep(const ExperimentConfig& cfg, Artifacts& out, RunResult&, std::ostream& log) {
    const std::string body = sweep_bound(cfg);
    out.csv("bound_sweep.csv", body);

    // Successive rhs ratios along the n list, per k.
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);
    std::map<std::size_t, std::vector<std::pair<std::size_t, std::string>>> by_k;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        by_k[std::stoul(f[1])].emplace_back(std::stoul(f[0]), f[5]);
    }
    std::ostringstream ratios;
    ratios << "k,n_from,n_to,ratio\n";
    for (const auto& [k, rows] : by_k)
        for (std::size_t i = 1; i < rows.size(); ++i) {
            ratios << k << ',' << rows[i - 1].first << ',' << rows[i].first << ',';
            if (rows[i - 1].second == "vacuous" || rows[i].second == "vacuous") {
                ratios << "vacuous\n";
                continue;
            }
            const double r = std::stod(rows[i].second) / std::stod(rows[i - 1].second);
            ratios << fmt(r) << '\n';
            log << "k=" << k << " rhs(" << rows[i].first << ")/rhs(" << rows[i - 1].first << ") = " << r << '\n';
        }
    out.csv("bound_ratios.csv", ratios.str());
}

void run_norm_check(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const StdDevProfile a = build_profile(cfg.profile);
    const MatrixEnsemble ens{cfg.ensemble, parse_law(cfg.law), cfg.seed};
    NormCheckOptions opts;
    opts.k_cal = cfg.k_cal;
    opts.seed = cfg.seed;
    const NormCheckReport r = norm_check(a, ens, cfg.norm_trials, cfg.norm_t, opts);
    const double root_bn = std::sqrt(r.b_n);

    std::ostringstream csv;
    csv << "trial,norm,frobenius,norm_over_sqrt_bn\n";
    for (std::size_t i = 0; i < r.norms.size(); ++i)
        csv << i << ',' << fmt(r.norms[i]) << ',' << fmt(r.frobenius[i]) << ',' << fmt(r.norms[i] / root_bn)
            << '\n';
    out.csv("norm_check.csv", csv.str());

    nlohmann::ordered_json j;
    j["trials"] = r.trials;
    j["excluded"] = r.excluded;
    j["b_n"] = r.b_n;
    j["budget"] = r.budget;
    j["k_cal"] = cfg.k_cal;
    j["t"] = r.t;
    j["c1"] = r.c1;
    j["max_norm"] = r.max_norm;
    j["mean_norm"] = r.mean_norm;
    j["max_norm_over_sqrt_bn"] = r.max_norm / root_bn;
    j["exceed_budget"] = r.exceed_budget;
    j["exceed_mean"] = r.exceed_mean;
    j["tail_bound"] = r.tail_bound;
    j["norms_below_frobenius"] = r.norms_below_frobenius;
    j["warnings"] = r.warnings;
    out.json("norm_check.json", j);

    log << "max ||Y||/sqrt(b_n) = " << r.max_norm / root_bn << ", exceedance " << r.exceed_mean << " vs bound "
        << r.tail_bound << '\n';
    if (!r.norms_below_frobenius) result.failures.push_back("an operator norm exceeded the Frobenius norm");
    if (cfg.norm_ratio_max && r.max_norm / root_bn > *cfg.norm_ratio_max)
        result.failures.push_back("max ||Y||/sqrt(b_n) = " + fmt(r.max_norm / root_bn) + " exceeds " +
                                  fmt(*cfg.norm_ratio_max));
}

void run_variance_check(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const StdDevProfile a = build_profile(cfg.profile);
    const MatrixEnsemble ens{cfg.ensemble, parse_law(cfg.law), cfg.seed};
    std::ostringstream csv;
    csv << "k,replicas,var_hat,var_se,s_k,structural_zero,passes\n";
    nlohmann::ordered_json notes = nlohmann::ordered_json::array();
    for (std::size_t k : cfg.ks) {
        const VarianceCheckReport r = variance_lower_bound_check(a, ens, k, cfg.replicas, cfg.seed);
        csv << k << ',' << r.replicas << ',' << fmt(r.var_hat) << ',' << fmt(r.var_se) << ',' << fmt(r.s_k) << ','
            << (r.structural_zero ? "true" : "false") << ',' << (r.passes ? "true" : "false") << '\n';
        for (const auto& n : r.notes) notes.push_back("k=" + std::to_string(k) + ": " + n);
        log << "k=" << k << " var_hat=" << r.var_hat << " +- " << r.var_se << " S_k=" << r.s_k
            << (r.passes ? " ok" : " FAIL") << '\n';
        if (!r.passes && !r.structural_zero)
            result.failures.push_back("k=" + std::to_string(k) + ": var_hat " + fmt(r.var_hat) +
                                      " below S_k " + fmt(r.s_k));
    }
    out.csv("variance_check.csv", csv.str());
    nlohmann::ordered_json j;
    j["notes"] = notes;
    out.json("variance_check.json", j);
}

StdDevProfile random_oracle_profile(const CounterRng& rng, std::uint32_t index, std::size_t max_n, double density) {
    const double u = rng.uniform(index, 0, 0, Stream::profile);
    const std::size_t n = 2 + std::min<std::size_t>(max_n - 2, static_cast<std::size_t>(u * static_cast<double>(max_n - 1)));
    const auto sz = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sz, sz);
    for (Eigen::Index i = 0; i < sz; ++i)
        for (Eigen::Index j = 0; j < sz; ++j) {
            const auto cell = static_cast<std::uint32_t>(i * sz + j);
            if (rng.uniform(index, cell, 1, Stream::profile) < density)
                m(i, j) = 0.1 + 0.9 * rng.uniform(index, cell, 2, Stream::profile);
        }
    return StdDevProfile::from_matrix(std::move(m));
}

void run_cycle_oracle(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const CounterRng rng(cfg.seed);
    std::ostringstream csv;
    csv << "case,n,k,brute,dfs,rel_err\n";
    double worst = 0.0;
    for (std::size_t c = 0; c < cfg.oracle_cases; ++c) {
        const StdDevProfile a =
            random_oracle_profile(rng, static_cast<std::uint32_t>(c), cfg.oracle_max_n, cfg.oracle_density);
        for (std::size_t k : cfg.ks) {
            const double brute = cycle_sum_brute(a, k).value;
            const double dfs = cycle_sum_dfs(a, k).value;
            const double scale = std::max(std::abs(brute), std::abs(dfs));
            const double rel = scale > 0 ? std::abs(brute - dfs) / scale : 0.0;
            worst = std::max(worst, rel);
            csv << c << ',' << a.rows() << ',' << k << ',' << fmt(brute) << ',' << fmt(dfs) << ',' << fmt(rel) << '\n';
            if (rel > 1e-9)
                result.failures.push_back("case " + std::to_string(c) + " k=" + std::to_string(k) +
                                          ": relative error " + fmt(rel));
        }
    }
    out.csv("cycle_oracle.csv", csv.str());
    log << "worst relative error " << worst << '\n';
}

std::vector<Eigen::MatrixXd> random_blocks(const EmbeddingPlan& plan, const CounterRng& rng, std::uint32_t trial) {
    const auto& d = plan.block_dims;
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    if (plan.kind == EmbeddingPlan::Kind::covariance)
        shapes.emplace_back(d[0], d[1]);
    else
        for (std::size_t i = 0; i < d.size(); ++i) shapes.emplace_back(d[i], d[(i + 1) % d.size()]);
    std::vector<Eigen::MatrixXd> blocks;
    for (std::size_t b = 0; b < shapes.size(); ++b) {
        const auto [r, c] = shapes[b];
        Eigen::MatrixXd x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rng.gaussian(trial, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(i * c + j),
                                 Stream::falsify);
        blocks.push_back(std::move(x));
    }
    return blocks;
}

void run_embedding(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const EntryLaw law = parse_law(cfg.law);
    const CounterRng rng(cfg.seed);
    std::ostringstream summary;
    summary << kSummaryHeader;
    for (std::size_t k : cfg.ks) {
        // Identity checks with random coefficients and c_0 >= 1, so the offset term is exercised.
        std::ostringstream csv;
        csv << "trial,offset,residual,residual_no_offset\n";
        double worst = 0.0;
        for (std::size_t t = 0; t < cfg.identity_trials; ++t) {
            const auto tt = static_cast<std::uint32_t>(t);
            std::vector<double> coeffs(k + 1);
            for (std::size_t i = 0; i < k; ++i)
                coeffs[i] = 2.0 * rng.uniform(tt, static_cast<std::uint32_t>(i), 0, Stream::calibration) - 1.0;
            coeffs[0] = 1.0 + std::abs(coeffs[0]);
            coeffs[k] = 1.0;
            const EmbeddingPlan plan = make_plan(cfg, PolynomialSpec(coeffs));
            const auto blocks = random_blocks(plan, rng, tt);
            const double res = verify_trace_identity(plan, blocks, true);
            const double res_no = verify_trace_identity(plan, blocks, false);
            worst = std::max(worst, res);
            csv << t << ',' << fmt(plan.trace_offset()) << ',' << fmt(res) << ',' << fmt(res_no) << '\n';
            if (res > 1e-10) result.failures.push_back("identity trial " + std::to_string(t) + ": residual " + fmt(res));
            if (plan.trace_offset() != 0.0 && res_no <= 1e-10)
                result.failures.push_back("identity trial " + std::to_string(t) +
                                          ": negative control not detected");
        }
        out.csv("identity" + suffix(k) + ".csv", csv.str());
        log << "k=" << k << " worst identity residual " << worst << '\n';

        if (cfg.replicas == 0) continue;
        const EmbeddingPlan plan = make_plan(cfg, cfg.polynomial(k));
        try {
            const SampleBatch batch = zk_via_embedding(plan, law, cfg.replicas, cfg.seed);
            emit_batch(cfg, out, result, log, batch, k, summary);
        } catch (const StructuralZeroVariance& e) {
            result.failures.push_back("k=" + std::to_string(k) + ": " + e.what());
        }
    }
    if (cfg.replicas > 0) out.csv("summary.csv", summary.str());
}

void run_er_concentration(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    for (std::size_t k : cfg.ks) {
        std::ostringstream csv;
        csv << "seed,cycle_sum,normalised_sum,expected_normalised,max_row_sum,row_sum_cap,within_cap\n";
        std::size_t within = 0;
        std::size_t in_band = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t s = 0; s < cfg.er_seeds; ++s) {
            ErdosRenyiConfig er = cfg.profile.er;
            er.n = cfg.profile.n;
            er.seed = cfg.profile.er.seed + s;
            const ErdosRenyiReport r = check_erdos_renyi_concentration(er, k);
            csv << er.seed << ',' << fmt(r.cycle_sum) << ',' << fmt(r.normalised_sum) << ','
                << fmt(r.expected_normalised) << ',' << fmt(r.max_row_sum) << ',' << fmt(r.row_sum_cap) << ','
                << (r.within_cap ? "true" : "false") << '\n';
            within += r.within_cap ? 1 : 0;
            in_band += std::abs(r.normalised_sum - 1.0) <= cfg.er_band ? 1 : 0;
            lo = std::min(lo, r.normalised_sum);
            hi = std::max(hi, r.normalised_sum);
        }
        out.csv("er_concentration" + suffix(k) + ".csv", csv.str());
        nlohmann::ordered_json j;
        j["k"] = k;
        j["seeds"] = cfg.er_seeds;
        j["within_cap"] = within;
        j["in_band"] = in_band;
        j["normalised_min"] = lo;
        j["normalised_max"] = hi;
        j["epsilon"] = [&] {
            ErdosRenyiConfig er = cfg.profile.er;
            er.n = cfg.profile.n;
            return er.epsilon();
        }();
        out.json("er_concentration" + suffix(k) + ".json", j);
        log << "k=" << k << " S_k/(np)^k in [" << lo << ", " << hi << "], within cap " << within << "/"
            << cfg.er_seeds << '\n';
        if (in_band != cfg.er_seeds)
            result.failures.push_back("k=" + std::to_string(k) + ": " + std::to_string(cfg.er_seeds - in_band) +
                                      " seeds outside the normalised band");
        if (static_cast<double>(within) < cfg.er_min_within * static_cast<double>(cfg.er_seeds))
            result.failures.push_back("k=" + std::to_string(k) + ": only " + std::to_string(within) +
                                      " seeds within the row-sum cap");
    }
}

void run_structural_zero(const ExperimentConfig& cfg, Artifacts& out, RunResult& result, std::ostream& log) {
    const StdDevProfile a = build_profile(cfg.profile);
    const MatrixEnsemble ens{a.symmetric() ? EnsembleKind::symmetric : EnsembleKind::iid, law_gaussian(), cfg.seed};
    std::ostringstream csv;
    csv << "k,support_forbids_walks,constant,rel_spread,mean_trace\n";
    for (std::size_t k : cfg.ks) {
        const bool forbids = support_forbids_closed_walks(a, k);
        const bool constant = structural_zero_check(a, k, cfg.structural_trials, cfg.seed);
        const auto mono = PolynomialSpec::monomial(k);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double mag = 0.0;
        double sum = 0.0;
        for (std::size_t t = 0; t < cfg.structural_trials; ++t) {
            const double v = trace_poly(assemble(a, sample_matrix(ens, a.rows(), t)), mono);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mag = std::max(mag, std::abs(v));
            sum += v;
        }
        const double spread = (hi - lo) / std::max(1.0, mag);
        csv << k << ',' << (forbids ? "true" : "false") << ',' << (constant ? "true" : "false") << ','
            << fmt(spread) << ',' << fmt(sum / static_cast<double>(cfg.structural_trials)) << '\n';
        log << "k=" << k << (constant ? " constant" : " varying") << " (spread " << spread << ")\n";
        const auto listed = [k](const std::vector<std::size_t>& v) {
            return std::find(v.begin(), v.end(), k) != v.end();
        };
        if (forbids && !constant)
            result.failures.push_back("k=" + std::to_string(k) + ": support forbids closed walks but traces vary");
        if (listed(cfg.expect_constant) && !constant)
            result.failures.push_back("k=" + std::to_string(k) + ": expected constant traces");
        if (listed(cfg.expect_varying) && constant)
            result.failures.push_back("k=" + std::to_string(k) + ": expected varying traces");
    }
    out.csv("structural_zero.csv", csv.str());
}

std::vector<std::size_t> sweep_sizes(const ExperimentConfig& cfg) {
    return cfg.ns.empty() ? std::vector<std::size_t>{cfg.profile.n} : cfg.ns;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::clt: return "clt";
        case ExperimentKind::bound_sweep: return "bound-sweep";
        case ExperimentKind::norm_check: return "norm-check";
        case ExperimentKind::variance_check: return "variance-check";
        case ExperimentKind::cycle_oracle: return "cycle-oracle";
        case ExperimentKind::embedding: return "embedding";
        case ExperimentKind::er_concentration: return "er-concentration";
        case ExperimentKind::structural_zero: return "structural-zero";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// RawConfig.

RawConfig RawConfig::parse(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    boost::property_tree::ptree tree;
    try {
        std::istringstream s(text);
        boost::property_tree::ini_parser::read_ini(s, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message(), {}, static_cast<long>(e.line()));
    }

    RawConfig cfg;
    std::istringstream lines(text);
    std::string section;
    long lineno = 0;
    for (std::string line; std::getline(lines, line);) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos) cfg.lines_[section + "." + trim(std::string_view(t).substr(0, eq))] = lineno;
    }

    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            const std::string key = "." + name;
            throw ConfigError("line " + std::to_string(cfg.line_of(key)) + ": key '" + name +
                                  "' outside any section",
                              name, cfg.line_of(key));
        }
        for (const auto& [key, leaf] : node) cfg.values_[name + "." + key] = leaf.get_value<std::string>();
    }
    return cfg;
}

RawConfig RawConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config '" + path + "'");
    return parse(f);
}

long RawConfig::line_of(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

std::string RawConfig::canonical() const {
    std::ostringstream out;
    std::string section;
    bool first = true;
    for (const auto& [key, value] : values_) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (first || sec != section) {
            if (!first) out << '\n';
            out << '[' << sec << "]\n";
            section = sec;
            first = false;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
    return out.str();
}

// Where results go and how many threads compute them do not change them.
std::uint64_t RawConfig::hash() const {
    RawConfig h = *this;
    h.erase("experiment.out");
    h.erase("experiment.workers");
    return fnv1a(h.canonical());
}

std::string RawConfig::hash_hex() const {
    char buf[17];
    const auto [ptr, ec] = std::to_chars(buf, buf + 16, hash(), 16);
    std::string s(buf, ptr);
    return std::string(16 - s.size(), '0') + s;
}

// ---------------------------------------------------------------------------
// Parsing and validation.

PolynomialSpec ExperimentConfig::polynomial(std::size_t k) const {
    if (coeffs) return PolynomialSpec(*coeffs);
    return PolynomialSpec::monomial(k);
}

StdDevProfile build_profile(const ProfileSpec& spec) {
    const std::size_t n = spec.n;
    const double dn = static_cast<double>(n);
    std::optional<StdDevProfile> a;
    const std::string& f = spec.family;
    if (f == "all-ones") {
        a = make_all_ones(n);
    } else if (f == "separable") {
        if (!(spec.c > 0.0 && spec.c <= 1.0)) throw DomainError("separable lower bound c must lie in (0,1]");
        std::vector<double> v(n, 1.0);
        for (std::size_t i = 0; i < n && n > 1; ++i)
            v[i] = spec.c + (1.0 - spec.c) * static_cast<double>(i) / (dn - 1.0);
        a = make_separable(v, v);
    } else if (f == "sampled") {
        std::function<double(double, double)> fn;
        if (spec.function == "cosine")
            fn = [](double x, double y) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * (x - y)); };
        else if (spec.function == "product")
            fn = [](double x, double y) { return (1.0 + x) * (1.0 + y) / 4.0; };
        else if (spec.function == "gaussian")
            fn = [](double x, double y) { return std::exp(-(x - y) * (x - y)); };
        else
            throw DomainError("unknown sampled function '" + spec.function + "'");
        a = make_sampled(fn, n);
    } else if (f == "bounded-below") {
        a = make_bounded_below(n, std::pow(dn, -spec.floor_exponent), spec.er.seed);
    } else if (f == "band-periodic" || f == "band-nonperiodic" || f == "anti-diagonal") {
        std::size_t band = spec.band;
        if (spec.band_exponent > 0.0) band = static_cast<std::size_t>(std::ceil(std::pow(dn, spec.band_exponent)));
        if (f == "anti-diagonal")
            a = make_anti_diagonal(n, band, spec.periodic);
        else
            a = make_band(n, band, f == "band-periodic");
    } else if (f == "block-sparse") {
        a = make_block_sparse(n, spec.c, spec.background);
    } else if (f == "erdos-renyi") {
        ErdosRenyiConfig er = spec.er;
        er.n = n;
        a = sample_erdos_renyi(er);
    } else if (f == "remark42-i" || f == "remark42-ii" || f == "remark42-iii") {
        const auto v = f == "remark42-i" ? Remark42Variant::i : f == "remark42-ii" ? Remark42Variant::ii : Remark42Variant::iii;
        a = make_remark42(v, n);
    } else if (f == "file") {
        a = load_profile(spec.path);
    } else {
        throw DomainError("unknown profile family '" + f + "'");
    }
    if (spec.scale != 1.0) a = a->scaled(spec.scale);
    return *a;
}

ExperimentConfig parse_experiment(const RawConfig& raw) {
    const Reader rd(raw);
    for (const auto& [key, value] : raw.values())
        if (!allowed_keys().count(key)) rd.fail(key, "unknown key");

    ExperimentConfig cfg;
    cfg.raw = raw;
    if (!raw.has("experiment.kind")) rd.fail("experiment.kind", "missing");
    cfg.kind = kind_from_string(rd, raw.get("experiment.kind"));
    cfg.name = rd.str("experiment.name", cfg.name);
    cfg.seed = rd.u64("experiment.seed", cfg.seed);
    cfg.replicas = rd.size("experiment.replicas", cfg.replicas);
    cfg.workers = rd.size("experiment.workers", cfg.workers);
    cfg.out = rd.str("experiment.out", cfg.out);
    if (cfg.out.empty()) rd.fail("experiment.out", "must not be empty");

    ProfileSpec& p = cfg.profile;
    p.family = rd.str("profile.family", p.family);
    p.n = rd.size("profile.n", p.n);
    p.band = rd.size("profile.band", p.band);
    p.band_exponent = rd.real("profile.band_exponent", p.band_exponent);
    p.periodic = rd.boolean("profile.periodic", p.periodic);
    p.c = rd.real("profile.c", p.c);
    p.background = rd.real("profile.background", p.background);
    p.floor_exponent = rd.real("profile.floor_exponent", p.floor_exponent);
    p.function = rd.str("profile.function", p.function);
    p.scale = rd.real("profile.scale", p.scale);
    p.path = rd.str("profile.path", p.path);
    p.er.p = rd.real("profile.p", 0.3);
    p.er.gamma = rd.real("profile.gamma", 0.25);
    p.er.alpha = rd.real("profile.alpha", 0.35);
    p.er.seed = rd.u64("profile.graph_seed", 0);
    p.er.n = p.n;
    if (p.n == 0) rd.fail("profile.n", "must be positive");
    if (!(p.scale >= 0.0)) rd.fail("profile.scale", "must be non-negative");
    if (p.family == "file" && p.path.empty()) rd.fail("profile.path", "required for family 'file'");

    try {
        cfg.ensemble = ensemble_from_string(rd.str("ensemble.kind", "symmetric"));
    } catch (const std::exception& e) {
        rd.fail("ensemble.kind", e.what());
    }
    cfg.law = rd.str("ensemble.law", cfg.law);
    EntryLaw law;
    try {
        law = parse_law(cfg.law);
    } catch (const std::exception& e) {
        rd.fail("ensemble.law", e.what());
    }

    cfg.ks = rd.sizes("sweep.k", cfg.ks);
    cfg.ns = rd.sizes("sweep.n", {});
    if (cfg.ks.empty()) rd.fail("sweep.k", "must list at least one degree");
    for (std::size_t k : cfg.ks)
        if (k == 0) rd.fail("sweep.k", "degrees must be positive");
    for (std::size_t n : cfg.ns)
        if (n == 0) rd.fail("sweep.n", "sizes must be positive");
    if (raw.has("polynomial.coeffs")) {
        try {
            const PolynomialSpec poly(rd.reals("polynomial.coeffs"));
            cfg.coeffs = poly.coeffs();
            if (raw.has("sweep.k") && (cfg.ks.size() != 1 || cfg.ks[0] != poly.degree()))
                rd.fail("sweep.k", "must equal the polynomial degree when coefficients are given");
            cfg.ks = {poly.degree()};
        } catch (const DomainError& e) {
            rd.fail("polynomial.coeffs", e.what());
        }
    }

    cfg.embedding_kind = rd.str("embedding.kind", cfg.embedding_kind);
    cfg.embedding_dims = rd.sizes("embedding.dims", cfg.embedding_dims);
    cfg.identity_trials = rd.size("embedding.trials", cfg.identity_trials);
    cfg.norm_trials = rd.size("norm.trials", cfg.norm_trials);
    cfg.norm_t = rd.real("norm.t", cfg.norm_t);
    cfg.k_cal = rd.real("norm.k_cal", cfg.k_cal);
    cfg.norm_ratio_max = rd.opt_real("norm.ratio_max");
    cfg.bins.bins = rd.size("gof.bins", cfg.bins.bins);
    cfg.bins.lo = rd.real("gof.lo", cfg.bins.lo);
    cfg.bins.hi = rd.real("gof.hi", cfg.bins.hi);
    cfg.ks_max = rd.opt_real("gof.ks_max");
    cfg.er_seeds = rd.size("erdos_renyi.seeds", cfg.er_seeds);
    cfg.er_band = rd.real("erdos_renyi.band", cfg.er_band);
    cfg.er_min_within = rd.real("erdos_renyi.min_within", cfg.er_min_within);
    cfg.oracle_cases = rd.size("oracle.cases", cfg.oracle_cases);
    cfg.oracle_max_n = rd.size("oracle.max_n", cfg.oracle_max_n);
    cfg.oracle_density = rd.real("oracle.density", cfg.oracle_density);
    cfg.structural_trials = rd.size("structural.trials", cfg.structural_trials);
    cfg.expect_constant = rd.sizes("structural.expect_constant", {});
    cfg.expect_varying = rd.sizes("structural.expect_varying", {});

    if (cfg.bins.bins < 10) rd.fail("gof.bins", "need at least 10 bins");
    if (!(cfg.bins.lo < cfg.bins.hi)) rd.fail("gof.hi", "must exceed gof.lo");

    // Kind-specific requirements, all checked before anything runs.
    auto check_profile = [&](std::size_t n) {
        ProfileSpec s = p;
        s.n = n;
        try {
            return build_profile(s);
        } catch (const std::exception& e) {
            rd.fail("profile.family", e.what());
        }
    };
    auto require_symmetric_match = [&](const StdDevProfile& a) {
        if (cfg.ensemble == EnsembleKind::symmetric && !a.symmetric())
            rd.fail("ensemble.kind", "symmetric ensemble needs a symmetric profile");
    };
    switch (cfg.kind) {
        case ExperimentKind::clt:
            if (cfg.replicas < 2) rd.fail("experiment.replicas", "need at least 2 replicas");
            require_symmetric_match(check_profile(p.n));
            break;
        case ExperimentKind::bound_sweep:
            for (std::size_t n : sweep_sizes(cfg)) check_profile(n);
            break;
        case ExperimentKind::norm_check:
            if (cfg.norm_trials < 30) rd.fail("norm.trials", "need at least 30 trials");
            if (!(cfg.norm_t > 0.0)) rd.fail("norm.t", "must be positive");
            if (!(cfg.k_cal > 0.0)) rd.fail("norm.k_cal", "must be positive");
            require_symmetric_match(check_profile(p.n));
            break;
        case ExperimentKind::variance_check:
            if (cfg.replicas < 3) rd.fail("experiment.replicas", "need at least 3 replicas");
            if (!law.theorem_compliant()) rd.fail("ensemble.law", law.compliance_warning());
            require_symmetric_match(check_profile(p.n));
            break;
        case ExperimentKind::cycle_oracle:
            if (cfg.oracle_max_n < 2) rd.fail("oracle.max_n", "must be at least 2");
            if (!(cfg.oracle_density >= 0.0 && cfg.oracle_density <= 1.0))
                rd.fail("oracle.density", "must lie in [0,1]");
            for (std::size_t k : cfg.ks)
                if (k > 10 || std::pow(static_cast<double>(cfg.oracle_max_n), static_cast<double>(k)) > 1e8)
                    rd.fail("sweep.k", "degree too large for brute-force enumeration");
            break;
        case ExperimentKind::embedding:
            if (cfg.embedding_kind != "covariance" && cfg.embedding_kind != "product")
                rd.fail("embedding.kind", "expected covariance or product");
            if (cfg.embedding_kind == "covariance" && cfg.embedding_dims.size() != 2)
                rd.fail("embedding.dims", "covariance takes exactly two dimensions n, m");
            if (!law.theorem_compliant()) rd.fail("ensemble.law", law.compliance_warning());
            if (cfg.replicas == 1) rd.fail("experiment.replicas", "need 0 or at least 2 replicas");
            try {
                for (std::size_t k : cfg.ks) make_plan(cfg, cfg.polynomial(k));
            } catch (const DomainError& e) {
                rd.fail("embedding.dims", e.what());
            }
            break;
        case ExperimentKind::er_concentration: {
            if (p.family != "erdos-renyi") rd.fail("profile.family", "er-concentration needs family erdos-renyi");
            if (cfg.er_seeds == 0) rd.fail("erdos_renyi.seeds", "must be positive");
            if (!(cfg.er_min_within >= 0.0 && cfg.er_min_within <= 1.0))
                rd.fail("erdos_renyi.min_within", "must lie in [0,1]");
            try {
                p.er.validate();
            } catch (const DomainError& e) {
                rd.fail("profile.p", e.what());
            }
            for (std::size_t k : cfg.ks)
                if (k > 10) rd.fail("sweep.k", "cycle sums are limited to k <= 10");
            break;
        }
        case ExperimentKind::structural_zero:
            if (cfg.structural_trials < 2) rd.fail("structural.trials", "need at least 2 trials");
            if (!check_profile(p.n).square()) rd.fail("profile.family", "profile must be square");
            break;
    }
    return cfg;
}

std::string sweep_bound(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << bound_csv_header() << '\n';
    const double c1 = parse_law(cfg.law).c1;
    for (std::size_t n : sweep_sizes(cfg)) {
        ProfileSpec spec = cfg.profile;
        spec.n = n;
        const StdDevProfile a = build_profile(spec);
        for (std::size_t k : cfg.ks) {
            try {
                out << bound_csv_row(tv_bound_rhs(a, k, c1)) << '\n';
            } catch (const BoundVacuous&) {
                out << n << ',' << k << ',' << format_double(a.max_entry()) << ',' << format_double(compute_bn(a))
                    << ",0,vacuous\n";
            }
        }
    }
    return out.str();
}

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.raw.has("experiment.workers")) set_worker_count(cfg.workers);
    RunResult result;
    Artifacts out(cfg, result);
    log << kVersion << " " << to_string(cfg.kind) << " '" << cfg.name << "' config=" << cfg.raw.hash_hex() << '\n';
    switch (cfg.kind) {
        case ExperimentKind::clt: run_clt(cfg, out, result, log); break;
        case ExperimentKind::bound_sweep: run_bound_sweep(cfg, out, result, log); break;
        case ExperimentKind::norm_check: run_norm_check(cfg, out, result, log); break;
        case ExperimentKind::variance_check: run_variance_check(cfg, out, result, log); break;
        case ExperimentKind::cycle_oracle: run_cycle_oracle(cfg, out, result, log); break;
        case ExperimentKind::embedding: run_embedding(cfg, out, result, log); break;
        case ExperimentKind::er_concentration: run_er_concentration(cfg, out, result, log); break;
        case ExperimentKind::structural_zero: run_structural_zero(cfg, out, result, log); break;
    }
    nlohmann::ordered_json status;
    status["status"] = result.failures.empty() ? "ok" : "invariant-failure";
    status["failures"] = result.failures;
    out.json("status.json", status);
    result.status = result.failures.empty() ? 0 : 1;
    return result;
}

}  // namespace vplab
