#include "vplab/simulate.hpp"

#include "vplab/errors.hpp"
#include "vplab/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace vplab {

PolynomialSpec::PolynomialSpec(std::vector<double> coeffs, double tau) : coeffs_(std::move(coeffs)), tau_(tau) {
    if (coeffs_.size() < 2) throw DomainError("polynomial degree must be >= 1");
    if (coeffs_.back() == 0.0) throw DomainError("leading coefficient c_k must be nonzero");
    double max_abs = 0.0;
    for (double c : coeffs_) {
        if (!std::isfinite(c)) throw DomainError("polynomial coefficients must be finite");
        max_abs = std::max(max_abs, std::abs(c));
    }
    if (tau_ == 0.0) tau_ = max_abs;
    if (max_abs > tau_) throw DomainError("coefficient exceeds the bound tau");
}

PolynomialSpec PolynomialSpec::monomial(std::size_t k) {
    std::vector<double> c(k + 1, 0.0);
    c.back() = 1.0;
    return PolynomialSpec(std::move(c));
}

PolynomialSpec PolynomialSpec::composed(std::size_t m) const {
    if (m == 0) throw DomainError("composition power must be >= 1");
    std::vector<double> c(degree() * m + 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) c[i * m] = coeffs_[i];
    return PolynomialSpec(std::move(c), tau_);
}

double PolynomialSpec::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> power_traces(const Eigen::MatrixXd& m, std::size_t k) {
    if (m.rows() != m.cols()) throw SizeError("power_traces needs a square matrix");
    if (k == 0) throw DomainError("k must be >= 1");
    // Powers up to h = ceil(k/2); Tr M^(a+b) = sum_ij (M^a)_ij (M^b)_ji.
    const std::size_t h = (k + 1) / 2;
    std::vector<Eigen::MatrixXd> pow;
    pow.reserve(h);
    pow.push_back(m);
    for (std::size_t j = 1; j < h; ++j) pow.push_back(pow.back() * m);

    std::vector<double> tr(k);
    for (std::size_t j = 1; j <= k; ++j) {
        if (j <= h) {
            tr[j - 1] = pow[j - 1].trace();
        } else {
            const std::size_t a = h;
            const std::size_t b = j - h;
            tr[j - 1] = pow[a - 1].cwiseProduct(pow[b - 1].transpose()).sum();
        }
    }
    return tr;
}

double trace_poly(const Eigen::MatrixXd& m, const PolynomialSpec& p) {
    const auto tr = power_traces(m, p.degree());
    double acc = p.constant() * static_cast<double>(m.rows());
    for (std::size_t j = 1; j <= p.degree(); ++j) acc += p.coeffs()[j] * tr[j - 1];
    return acc;
}

SampleBatch standardise(std::vector<double> raw) {
    const std::size_t r = raw.size();
    if (r < 2) throw DomainError("need at least 2 replicas to standardise");
    SampleBatch b;
    b.replicas = r;
    const double rr = static_cast<double>(r);

    long double mean = 0.0L;
    long double second = 0.0L;
    for (double x : raw) {
        mean += x;
        second += static_cast<long double>(x) * x;
    }
    mean /= rr;
    second /= rr;
    long double m2 = 0.0L;
    long double m4 = 0.0L;
    for (double x : raw) {
        const long double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double var = static_cast<double>(m2 / (rr - 1.0));
    const double scale = std::max(1.0, static_cast<double>(second));
    if (!(var > 10.0 * std::numeric_limits<double>::epsilon() * scale))
        throw StructuralZeroVariance("Monte Carlo variance of the trace statistic vanished", std::move(raw));

    b.mean_hat = static_cast<double>(mean);
    b.var_hat = var;
    b.mean_se = std::sqrt(var / rr);
    // Var(s^2) ~ (mu4 - (R-3)/(R-1) sigma^4) / R
    const double mu4 = static_cast<double>(m4 / rr);
    const double sig2 = static_cast<double>(m2 / rr);
    b.var_se = std::sqrt(std::max(0.0, (mu4 - (rr - 3.0) / (rr - 1.0) * sig2 * sig2) / rr));

    // Centre with the extended-precision mean; rounding it to double first
    // costs |mean| eps / sd in every z when the spread is small.
    const long double sd = std::sqrt(m2 / (rr - 1.0));
    b.z_samples.resize(r);
    for (std::size_t i = 0; i < r; ++i) b.z_samples[i] = static_cast<double>((raw[i] - mean) / sd);
    b.raw_traces = std::move(raw);
    return b;
}

SampleBatch run_batch(const StdDevProfile& a, const MatrixEnsemble& ens_in, const PolynomialSpec& p,
                      std::size_t replicas, std::uint64_t seed) {
    if (!a.square()) throw SizeError("run_batch needs a square profile");
    if (ens_in.kind == EnsembleKind::symmetric && !a.symmetric())
        throw DomainError("symmetric ensemble requires a symmetric profile");
    MatrixEnsemble ens = ens_in;
    ens.seed = seed;

    std::vector<double> raw(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        const Eigen::MatrixXd y = assemble(a, sample_matrix(ens, a.rows(), r));
        raw[r] = trace_poly(y, p);
    });

    SampleBatch b = standardise(std::move(raw));
    b.fingerprint = BatchFingerprint{a.hash(),        std::string(to_string(a.family())),
                                     ens.law.name,    std::string(to_string(ens.kind)),
                                     a.rows(),        p.coeffs(),
                                     seed,            replicas};
    if (auto w = ens.law.compliance_warning(); !w.empty()) b.warnings.push_back(std::move(w));
    return b;
}

bool support_forbids_closed_walks(const StdDevProfile& a, std::size_t k) {
    if (!a.square()) throw SizeError("needs a square profile");
    if (k == 0) throw DomainError("k must be >= 1");
    const auto n = static_cast<Eigen::Index>(a.rows());
    Eigen::MatrixXd s = (a.dense().array() > 0.0).cast<double>().matrix();
    // reach(i, j) = 1 iff a support walk of the current length joins i to j.
    Eigen::MatrixXd reach = s;
    for (std::size_t t = 1; t < k; ++t) {
        reach = reach * s;
        reach = (reach.array() > 0.0).cast<double>().matrix();
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (reach(i, i) > 0.0) return false;
    return true;
}

bool structural_zero_check(const StdDevProfile& a, std::size_t k, std::size_t trials, std::uint64_t seed) {
    if (support_forbids_closed_walks(a, k)) return true;
    if (trials < 2) return false;
    MatrixEnsemble ens{a.symmetric() ? EnsembleKind::symmetric : EnsembleKind::iid, law_gaussian(), seed};
    const auto mono = PolynomialSpec::monomial(k);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double mag = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double v = trace_poly(assemble(a, sample_matrix(ens, a.rows(), t)), mono);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mag = std::max(mag, std::abs(v));
    }
    return hi - lo <= 1e-9 * std::max(1.0, mag);
}

void write_batch_csv(std::ostream& out, const SampleBatch& b) {
    out << "replica,raw_trace,z\n";
    for (std::size_t r = 0; r < b.replicas; ++r)
        out << r << ',' << format_double(b.raw_traces[r]) << ',' << format_double(b.z_samples[r]) << '\n';
}

std::string batch_json(const SampleBatch& b) {
    nlohmann::ordered_json j;
    const auto& f = b.fingerprint;
    j["fingerprint"] = {{"profile_hash", f.profile_hash}, {"family", f.family}, {"law", f.law},
                        {"ensemble", f.ensemble},         {"n", f.n},           {"coeffs", f.coeffs},
                        {"seed", f.seed},                 {"replicas", f.replicas}};
    j["mean_hat"] = b.mean_hat;
    j["var_hat"] = b.var_hat;
    j["mean_se"] = b.mean_se;
    j["var_se"] = b.var_se;
    j["warnings"] = b.warnings;
    return j.dump(2);
}

}  // namespace vplab
