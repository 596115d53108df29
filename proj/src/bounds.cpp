#include "vplab/bounds.hpp"

#include "vplab/cycles.hpp"
#include "vplab/errors.hpp"
#include "vplab/parallel.hpp"
#include "vplab/simulate.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vplab {

double compute_bn(const StdDevProfile& a) {
    const Eigen::MatrixXd b = a.variance_profile();
    const double rows = b.rowwise().sum().maxCoeff();
    const double cols = b.colwise().sum().maxCoeff();
    return std::max({rows, cols, std::log(static_cast<double>(a.rows()))});
}

double norm_budget(const StdDevProfile& a, double c1) {
    const Eigen::MatrixXd b = a.variance_profile();
    const double rows = std::sqrt(b.rowwise().sum().maxCoeff());
    const double cols = std::sqrt(b.colwise().sum().maxCoeff());
    return rows + cols + (a.max_entry() + std::numbers::sqrt2 * c1) * std::sqrt(std::log(static_cast<double>(a.rows())));
}

KappaComponents kappa_diagnostics(const StdDevProfile& a, std::size_t k, double lambda_cap) {
    if (k == 0) throw DomainError("k must be >= 1");
    if (!(lambda_cap >= 1.0)) throw DomainError("lambda_cap must be >= 1");
    const double kk = static_cast<double>(k);
    const double amax = a.max_entry();
    const double sqrt_r = std::sqrt(static_cast<double>(a.rows()));
    const double f1 = kk * kk * std::pow(lambda_cap, kk - 1.0);
    const double f2 = k >= 2 ? kk * kk * kk * std::pow(lambda_cap, kk - 2.0) : 0.0;
    const double eta0 = amax * f1;
    const double eta1 = amax * f1 * sqrt_r;
    // gamma_2 vanishes because the entries are linear in X.
    const double eta2 = amax * amax * f2;
    return {eta0 * eta1, eta1, eta2};
}

KappaComponents kappa_diagnostics(const StdDevProfile& a, std::size_t k) {
    return kappa_diagnostics(a, k, std::max(1.0, std::sqrt(compute_bn(a))));
}

BoundReport tv_bound_rhs(const StdDevProfile& a, std::size_t k, double c1) {
    if (!a.square()) throw SizeError("bound needs a square profile");
    BoundReport r;
    r.n = a.rows();
    r.k = k;
    r.max_a = a.max_entry();
    r.b_n = compute_bn(a);
    r.s_k = cycle_sum_dfs(a, k).value;
    r.sigma2_lower = r.s_k;
    r.norm_budget = norm_budget(a, c1);
    const auto kap = kappa_diagnostics(a, k);
    r.kappa0 = kap.kappa0;
    r.kappa1 = kap.kappa1;
    r.kappa2 = kap.kappa2;
    if (k == 1) r.notes.push_back("k=1: S_1 uses the literal convention sum_i a_ii^2");
    if (!(r.s_k > 0.0)) throw BoundVacuous("S_k(A) = 0: the TV bound is uninformative");
    const double kk = static_cast<double>(k);
    r.rhs = r.max_a * r.max_a * std::pow(kk, 5.0) * std::sqrt(static_cast<double>(r.n)) *
            std::pow(r.b_n, kk - 1.0) / r.s_k;
    return r;
}

std::string bound_json(const BoundReport& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["max_a"] = r.max_a;
    j["b_n"] = r.b_n;
    j["s_k"] = r.s_k;
    j["rhs"] = r.rhs;
    j["kappa0"] = r.kappa0;
    j["kappa1"] = r.kappa1;
    j["kappa2"] = r.kappa2;
    j["sigma2_lower"] = r.sigma2_lower;
    j["norm_budget"] = r.norm_budget;
    j["notes"] = r.notes;
    return j.dump(2);
}

std::string bound_csv_header() { return "n,k,max_a,b_n,s_k,rhs"; }

std::string bound_csv_row(const BoundReport& r) {
    std::ostringstream s;
    s << r.n << ',' << r.k << ',' << format_double(r.max_a) << ',' << format_double(r.b_n) << ','
      << format_double(r.s_k) << ',' << format_double(r.rhs);
    return s.str();
}

SpectralNorm spectral_norm(const Eigen::MatrixXd& m, double tol, std::size_t max_iter) {
    SpectralNorm out;
    if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
        out.converged = true;
        return out;
    }
    Eigen::VectorXd v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    v.normalize();
    double prev = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXd w = m * v;
        const double est = w.norm();
        Eigen::VectorXd u = m.transpose() * w;
        const double un = u.norm();
        out.iterations = it;
        out.value = est;
        if (un == 0.0) {
            out.converged = true;
            break;
        }
        v = u / un;
        if (it > 1 && std::abs(est - prev) <= tol * est) {
            out.converged = true;
            break;
        }
        prev = est;
    }
    return out;
}

NormCheckReport norm_check(const StdDevProfile& a, const MatrixEnsemble& ens_in, std::size_t trials, double t,
                           const NormCheckOptions& opts) {
    if (trials < 30) throw DomainError("norm_check needs at least 30 trials");
    if (!a.square()) throw SizeError("norm_check needs a square profile");
    MatrixEnsemble ens = ens_in;
    ens.seed = opts.seed;

    NormCheckReport r;
    r.trials = trials;
    r.t = t;
    r.c1 = ens.law.c1;
    r.b_n = compute_bn(a);
    r.budget = opts.k_cal * norm_budget(a, ens.law.c1);
    r.tail_bound = std::exp(-t * t / (ens.law.c1 * ens.law.c1));
    if (auto w = ens.law.compliance_warning(); !w.empty()) r.warnings.push_back(std::move(w));

    std::vector<SpectralNorm> norms(trials);
    std::vector<double> frob(trials);
    parallel_for(trials, [&](std::size_t i) {
        const Eigen::MatrixXd y = assemble(a, sample_matrix(ens, a.rows(), i, Stream::norm));
        norms[i] = spectral_norm(y, opts.tol, opts.max_iter);
        frob[i] = y.norm();
    });

    for (std::size_t i = 0; i < trials; ++i) {
        if (!norms[i].converged) {
            ++r.excluded;
            continue;
        }
        r.norms.push_back(norms[i].value);
        r.frobenius.push_back(frob[i]);
        if (norms[i].value > frob[i] * (1.0 + 1e-12)) r.norms_below_frobenius = false;
    }
    if (r.norms.empty()) return r;
    const double cnt = static_cast<double>(r.norms.size());
    r.max_norm = *std::max_element(r.norms.begin(), r.norms.end());
    for (double v : r.norms) r.mean_norm += v / cnt;
    for (double v : r.norms) {
        if (v > r.budget + t) r.exceed_budget += 1.0 / cnt;
        if (v > r.mean_norm + t) r.exceed_mean += 1.0 / cnt;
    }
    return r;
}

double calibrate_norm_constant(const std::vector<std::size_t>& sizes, std::size_t trials, double quantile,
                               std::uint64_t seed) {
    if (sizes.empty() || trials == 0) throw DomainError("calibration needs sizes and trials");
    if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("quantile must lie in (0,1)");
    std::vector<double> ratios;
    const MatrixEnsemble ens{EnsembleKind::symmetric, law_gaussian(), seed};
    for (std::size_t n : sizes) {
        const StdDevProfile a = make_all_ones(n);
        const double budget = norm_budget(a, 1.0);
        std::vector<double> vals(trials);
        parallel_for(trials, [&](std::size_t i) {
            vals[i] = spectral_norm(assemble(a, sample_matrix(ens, n, i, Stream::calibration))).value / budget;
        });
        ratios.insert(ratios.end(), vals.begin(), vals.end());
    }
    std::sort(ratios.begin(), ratios.end());
    const auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(ratios.size()))) - 1;
    return ratios[std::min(idx, ratios.size() - 1)];
}

VarianceCheckReport variance_lower_bound_check(const StdDevProfile& a, const MatrixEnsemble& ens, std::size_t k,
                                               std::size_t replicas, std::uint64_t seed) {
    if (!ens.law.theorem_compliant())
        throw NonCompliantLaw("variance lower bound needs a symmetric unit-variance law: " +
                              ens.law.compliance_warning());
    VarianceCheckReport r;
    r.k = k;
    r.replicas = replicas;
    r.s_k = cycle_sum_dfs(a, k).value;
    if (ens.kind == EnsembleKind::symmetric)
        r.notes.push_back("symmetric ensemble: the lower bound is checked empirically, the i.i.d. proof does not "
                          "cover shared entries of reversed cycles");
    try {
        const SampleBatch b = run_batch(a, ens, PolynomialSpec::monomial(k), replicas, seed);
        r.var_hat = b.var_hat;
        r.var_se = b.var_se;
        r.passes = r.var_hat >= r.s_k * (1.0 - 3.0 * r.var_se / r.var_hat);
    } catch (const StructuralZeroVariance&) {
        r.structural_zero = true;
        r.passes = r.s_k == 0.0;
        r.notes.push_back("trace is deterministic for this (A, k)");
    }
    if (r.s_k == 0.0) r.notes.push_back("S_k(A) = 0: the lower bound is vacuous");
    return r;
}

}  // namespace vplab
