#include "vplab/embeddings.hpp"

#include "vplab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vplab {
namespace {

std::vector<Eigen::Index> block_offsets(const std::vector<std::size_t>& dims) {
    std::vector<Eigen::Index> off(dims.size() + 1, 0);
    for (std::size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + static_cast<Eigen::Index>(dims[i]);
    return off;
}

}  // namespace

double EmbeddingPlan::trace_offset() const {
    return base_poly.constant() *
           (static_cast<double>(host_dim()) - static_cast<double>(multiplicity) * static_cast<double>(base_dim()));
}

EmbeddingPlan plan_covariance(std::size_t n, std::size_t m, const PolynomialSpec& p) {
    if (n == 0 || m == 0) throw DomainError("covariance embedding needs n, m >= 1");
    const auto nn = static_cast<Eigen::Index>(n);
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd host = Eigen::MatrixXd::Zero(nn + mm, nn + mm);
    host.topRightCorner(nn, mm).setOnes();
    host.bottomLeftCorner(mm, nn).setOnes();
    return EmbeddingPlan{EmbeddingPlan::Kind::covariance,
                         {n, m},
                         p,
                         p.composed(2),
                         StdDevProfile(std::move(host), FamilyTag::custom, true),
                         2,
                         EnsembleKind::symmetric};
}

EmbeddingPlan plan_product(std::vector<std::size_t> dims, const PolynomialSpec& p, double max_aspect) {
    if (dims.size() < 2) throw DomainError("product embedding needs at least 2 factors");
    if (std::find(dims.begin(), dims.end(), 0u) != dims.end()) throw DomainError("factor dimensions must be >= 1");
    const auto [lo, hi] = std::minmax_element(dims.begin(), dims.end());
    if (static_cast<double>(*hi) / static_cast<double>(*lo) > max_aspect)
        throw DomainError("factor aspect ratio exceeds the configured bound");
    // Rotate so the first factor has the smallest leading dimension; the
    // cyclic product has the same nonzero spectrum after rotation.
    std::rotate(dims.begin(), dims.begin() + (lo - dims.begin()), dims.end());

    const std::size_t m = dims.size();
    const auto off = block_offsets(dims);
    const Eigen::Index total = off.back();
    Eigen::MatrixXd host = Eigen::MatrixXd::Zero(total, total);
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t c = (b + 1) % m;
        host.block(off[b], off[c], static_cast<Eigen::Index>(dims[b]), static_cast<Eigen::Index>(dims[c])).setOnes();
    }
    return EmbeddingPlan{EmbeddingPlan::Kind::product,
                         std::move(dims),
                         p,
                         p.composed(m),
                         StdDevProfile::from_matrix(std::move(host), FamilyTag::custom),
                         m,
                         EnsembleKind::iid};
}

Eigen::MatrixXd assemble_host(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks) {
    const auto& d = plan.block_dims;
    const auto off = block_offsets(d);
    const Eigen::Index total = off.back();
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(total, total);
    if (plan.kind == EmbeddingPlan::Kind::covariance) {
        if (blocks.size() != 1 || blocks[0].rows() != static_cast<Eigen::Index>(d[0]) ||
            blocks[0].cols() != static_cast<Eigen::Index>(d[1]))
            throw SizeError("covariance embedding expects one n x m block");
        y.block(0, off[1], off[1], off[2] - off[1]) = blocks[0];
        y.block(off[1], 0, off[2] - off[1], off[1]) = blocks[0].transpose();
        return y;
    }
    const std::size_t m = d.size();
    if (blocks.size() != m) throw SizeError("product embedding expects one block per factor");
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t c = (b + 1) % m;
        if (blocks[b].rows() != static_cast<Eigen::Index>(d[b]) || blocks[b].cols() != static_cast<Eigen::Index>(d[c]))
            throw SizeError("product factor has the wrong shape");
        y.block(off[b], off[c], blocks[b].rows(), blocks[b].cols()) = blocks[b];
    }
    return y;
}

Eigen::MatrixXd embedded_statistic(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks) {
    if (blocks.empty()) throw SizeError("no blocks");
    if (plan.kind == EmbeddingPlan::Kind::covariance) return blocks[0] * blocks[0].transpose();
    Eigen::MatrixXd prod = blocks[0];
    for (std::size_t b = 1; b < blocks.size(); ++b) prod = prod * blocks[b];
    return prod;
}

double verify_trace_identity(const EmbeddingPlan& plan, const std::vector<Eigen::MatrixXd>& blocks,
                             bool include_offset) {
    const Eigen::MatrixXd host = assemble_host(plan, blocks);
    const double lhs = trace_poly(host, plan.composed_poly);
    double rhs = static_cast<double>(plan.multiplicity) * trace_poly(embedded_statistic(plan, blocks), plan.base_poly);
    if (include_offset) rhs += plan.trace_offset();
    return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
}

std::vector<Eigen::MatrixXd> extract_blocks(const EmbeddingPlan& plan, const Eigen::MatrixXd& y) {
    const auto& d = plan.block_dims;
    const auto off = block_offsets(d);
    if (y.rows() != off.back() || y.cols() != off.back()) throw SizeError("host sample has the wrong size");
    if (plan.kind == EmbeddingPlan::Kind::covariance) return {y.block(0, off[1], off[1], off[2] - off[1])};
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t b = 0; b < d.size(); ++b) {
        const std::size_t c = (b + 1) % d.size();
        out.emplace_back(y.block(off[b], off[c], static_cast<Eigen::Index>(d[b]), static_cast<Eigen::Index>(d[c])));
    }
    return out;
}

SampleBatch zk_via_embedding(const EmbeddingPlan& plan, const EntryLaw& law, std::size_t replicas,
                             std::uint64_t seed) {
    if (!law.theorem_compliant()) throw NonCompliantLaw(law.compliance_warning());
    const MatrixEnsemble ens{plan.host_ensemble, law, seed};
    return run_batch(plan.host, ens, plan.composed_poly, replicas, seed);
}

}  // namespace vplab
