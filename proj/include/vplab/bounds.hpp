#pragma once

#include "vplab/entrylaws.hpp"
#include "vplab/profiles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace vplab {

/// max over all row and column sums of a_ij^2, floored at log n (natural log).
double compute_bn(const StdDevProfile& a);

/// max_i sqrt(sum_j a_ij^2) + max_j sqrt(sum_i a_ij^2) + (max a_ij + sqrt(2) c1) sqrt(log n).
double norm_budget(const StdDevProfile& a, double c1);

struct KappaComponents {
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
};

/// Constant-free majorants of the second-order Poincare quantities with the
/// operator norm capped at lambda_cap and rank bounded by n:
///   f1 <= k^2 L^{k-1},  f2 <= k^3 L^{k-2} (0 for k = 1),
///   kappa0 = a^2 k^4 L^{2(k-1)} sqrt(n),  kappa1 = a k^2 L^{k-1} sqrt(n),
///   kappa2 = a^2 k^3 L^{k-2}, with a = max a_ij.
KappaComponents kappa_diagnostics(const StdDevProfile& a, std::size_t k, double lambda_cap);
/// lambda_cap = sqrt(b_n).
KappaComponents kappa_diagnostics(const StdDevProfile& a, std::size_t k);

/// Every ingredient of the TV bound for (A, k). The universal constant of
/// the bound is not included.
struct BoundReport {
    std::size_t n = 0;
    std::size_t k = 0;
    double max_a = 0.0;
    double b_n = 0.0;
    double s_k = 0.0;
    double rhs = 0.0;  ///< max_a^2 k^5 sqrt(n) b_n^{k-1} / s_k
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double sigma2_lower = 0.0;  ///< = s_k, the variance lower bound for P = x^k
    double norm_budget = 0.0;
    std::vector<std::string> notes;
};

/// Throws BoundVacuous when S_k(A) = 0.
BoundReport tv_bound_rhs(const StdDevProfile& a, std::size_t k, double c1 = 1.0);

std::string bound_json(const BoundReport& r);
/// "n,k,max_a,b_n,s_k,rhs"
std::string bound_csv_header();
std::string bound_csv_row(const BoundReport& r);

struct SpectralNorm {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Largest singular value by power iteration on M^T M; stops when the
/// estimate changes by less than `tol` relative.
SpectralNorm spectral_norm(const Eigen::MatrixXd& m, double tol = 1e-8, std::size_t max_iter = 5000);

struct NormCheckOptions {
    double k_cal = 1.0;  ///< calibration constant for the budget, 1 = uncalibrated
    double tol = 1e-8;
    std::size_t max_iter = 5000;
    std::uint64_t seed = 0;
};

struct NormCheckReport {
    std::size_t trials = 0;
    std::size_t excluded = 0;  ///< power iteration did not converge
    std::vector<double> norms;  ///< converged trials only
    std::vector<double> frobenius;
    bool norms_below_frobenius = true;
    double budget = 0.0;  ///< k_cal * norm_budget
    double b_n = 0.0;
    double t = 0.0;
    double c1 = 0.0;
    double max_norm = 0.0;
    double mean_norm = 0.0;
    double exceed_budget = 0.0;  ///< frequency of ||Y|| > budget + t
    double exceed_mean = 0.0;    ///< frequency of ||Y|| > mean + t
    double tail_bound = 0.0;     ///< exp(-t^2 / c1^2)
    std::vector<std::string> warnings;
};

/// Requires trials >= 30.
NormCheckReport norm_check(const StdDevProfile& a, const MatrixEnsemble& ens, std::size_t trials, double t,
                           const NormCheckOptions& opts = {});

/// Fits K_cal as the `quantile` of ||Y|| / norm_budget over a Gaussian
/// symmetric all-ones baseline at each n in `sizes`. An empirical fit, not a universal constant.
double calibrate_norm_constant(const std::vector<std::size_t>& sizes, std::size_t trials, double quantile,
                               std::uint64_t seed);

struct VarianceCheckReport {
    std::size_t k = 0;
    std::size_t replicas = 0;
    double var_hat = 0.0;
    double var_se = 0.0;
    double s_k = 0.0;
    bool structural_zero = false;
    bool passes = false;  ///< var_hat >= s_k (1 - 3 var_se / var_hat)
    std::vector<std::string> notes;
};

/// Monte Carlo check of Var Tr((A o X)^k) >= S_k(A). Refuses
/// (NonCompliantLaw) laws that are not symmetric with unit variance.
VarianceCheckReport variance_lower_bound_check(const StdDevProfile& a, const MatrixEnsemble& ens, std::size_t k,
                                               std::size_t replicas, std::uint64_t seed);

}  // namespace vplab
