#pragma once

#include "vplab/entrylaws.hpp"
#include "vplab/profiles.hpp"
#include "vplab/simulate.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vplab {

/// Block embedding of XX^t (covariance) or X_1...X_m (product) into a host
/// A o Y whose powers carry the statistic on the diagonal blocks.
struct EmbeddingPlan {
    enum class Kind { covariance, product };

    Kind kind = Kind::covariance;
    /// (n, m) for covariance; n_1..n_m for products, rotated so n_1 is minimal.
    std::vector<std::size_t> block_dims;
    PolynomialSpec base_poly = PolynomialSpec::monomial(1);
    /// Q(x) = P(x^2) for covariance, P(x^m) for products.
    PolynomialSpec composed_poly = PolynomialSpec::monomial(2);
    StdDevProfile host = make_all_ones(1);
    /// Tr Q(host) = multiplicity * Tr P(statistic) + trace_offset().
    std::size_t multiplicity = 2;
    EnsembleKind host_ensemble = EnsembleKind::symmetric;

    std::size_t host_dim() const { return host.rows(); }
    /// Dimension of the matrix the base polynomial is applied to.
    std::size_t base_dim() const { return block_dims.front(); }
    /// c_0 (host_dim - multiplicity * base_dim); (m - n) c_0 for covariance.
    double trace_offset() const;
};

/// Host (n+m) x (n+m), symmetric, with all-ones off-diagonal blocks.
EmbeddingPlan plan_covariance(std::size_t n, std::size_t m, const PolynomialSpec& p);

/// Host sum(n_i), all-ones blocks at cyclic superdiagonal positions (i, i+1 mod m).
/// Requires m >= 2 and max n_i / min n_i <= max_aspect.
EmbeddingPlan plan_product(std::vector<std::size_t> dims, const PolynomialSpec& p, double max_aspect = 16.0);

/// Places the factor blocks into the host matrix A o Y. Covariance takes one
/// n x m block X; products take X_1..X_m with X_i of size n_i x n_{i+1}.
Eigen::MatrixXd assemble_host(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks);

/// XX^t for covariance, X_1 X_2 ... X_m for products.
Eigen::MatrixXd embedded_statistic(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks);

/// |Tr Q(host) - (multiplicity Tr P(stat) + offset)| / (1 + |RHS|). With
/// include_offset = false the c_0 correction is left out (negative control).
double verify_trace_identity(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks,
                             bool include_offset = true);

/// Factor blocks read back out of a host sample A o Y.
std::vector<Eigen::MatrixXd> extract_blocks(const EmbeddingPlan& plan, const Eigen::MatrixXd& host_y);

/// Z samples of the embedded statistic via run_batch on the host with Q.
/// Requires a theorem-compliant law.
SampleBatch zk_via_embedding(const EmbeddingPlan& plan, const EntryLaw& law, std::size_t replicas,
                             std::uint64_t seed);

}  // namespace vplab
