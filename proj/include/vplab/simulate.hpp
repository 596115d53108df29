#pragma once

#include "vplab/entrylaws.hpp"
#include "vplab/profiles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vplab {

/// Test polynomial P_k(x) = sum_{i=0}^k c_i x^i with c_k != 0, k >= 1 and
/// |c_i| <= tau.
class PolynomialSpec {
public:
    /// tau defaults to max |c_i|.
    explicit PolynomialSpec(std::vector<double> coeffs, double tau = 0.0);

    static PolynomialSpec monomial(std::size_t k);

    std::size_t degree() const { return coeffs_.size() - 1; }
    double tau() const { return tau_; }
    double constant() const { return coeffs_.front(); }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// x -> P(x^m), degree m k.
    PolynomialSpec composed(std::size_t m) const;

    double operator()(double x) const;

private:
    std::vector<double> coeffs_;
    double tau_;
};

/// (Tr M, Tr M^2, ..., Tr M^k) by dense products, no eigen-solver.
std::vector<double> power_traces(const Eigen::MatrixXd& m, std::size_t k);

/// c_0 n + sum_{j>=1} c_j Tr M^j.
double trace_poly(const Eigen::MatrixXd& m, const PolynomialSpec& p);

struct BatchFingerprint {
    std::uint64_t profile_hash = 0;
    std::string family;
    std::string law;
    std::string ensemble;
    std::size_t n = 0;
    std::vector<double> coeffs;
    std::uint64_t seed = 0;
    std::size_t replicas = 0;
};

/// Monte Carlo replicas of Tr P(A o X) and the standardised statistic Z.
struct SampleBatch {
    std::size_t replicas = 0;
    std::vector<double> raw_traces;
    double mean_hat = 0.0;
    double var_hat = 0.0;   ///< unbiased sample variance
    double mean_se = 0.0;   ///< sqrt(var_hat / R)
    double var_se = 0.0;    ///< from the fourth central moment
    std::vector<double> z_samples;
    BatchFingerprint fingerprint;
    std::vector<std::string> warnings;
};

/// Replica r uses X sampled with counter (r, i, j) under `seed`. Throws
/// StructuralZeroVariance when var_hat <= 10 eps max(1, mean of raw^2).
SampleBatch run_batch(const StdDevProfile& a, const MatrixEnsemble& ens, const PolynomialSpec& p,
                      std::size_t replicas, std::uint64_t seed);

/// Standardises already-computed traces; the same rules as run_batch.
SampleBatch standardise(std::vector<double> raw_traces);

/// True iff Tr((A o X)^k) is the same for every X: either the support
/// graph of A has no closed k-walk (exact), or `trials` draws agree to
/// 1e-9 relative.
bool structural_zero_check(const StdDevProfile& a, std::size_t k, std::size_t trials, std::uint64_t seed = 0);

/// diag((support of A)^k) is identically zero.
bool support_forbids_closed_walks(const StdDevProfile& a, std::size_t k);

/// "replica,raw_trace,z" rows.
void write_batch_csv(std::ostream& out, const SampleBatch& b);
/// Fingerprint, mean_hat, var_hat and standard errors.
std::string batch_json(const SampleBatch& b);

}  // namespace vplab
