#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vplab {

/// Where a profile came from. Carried through reports and file fingerprints.
enum class FamilyTag {
    all_ones,
    separable,
    sampled,
    band_periodic,
    band_nonperiodic,
    erdos_renyi,
    block_sparse,
    anti_diagonal,
    remark42_i,
    remark42_ii,
    remark42_iii,
    custom,
};

std::string_view to_string(FamilyTag tag);
FamilyTag family_from_string(std::string_view name);

enum class Storage { dense, sparse };

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Out-neighbour lists of a non-negative matrix, restricted to its support.
/// Row i's entries are targets[offsets[i] .. offsets[i+1]).
struct AdjacencyList {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> targets;
    std::vector<double> weights;

    std::size_t vertices() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Deterministic standard deviation profile A (non-negative, immutable).
///
/// Entries are always held densely; when fewer than 10% are nonzero the
/// coordinate list is materialised as well and storage() reports sparse.
class StdDevProfile {
public:
    /// Validates non-negativity/finiteness. With symmetric=true the matrix must
    /// be square and exactly equal to its transpose.
    StdDevProfile(Eigen::MatrixXd entries, FamilyTag tag, bool symmetric);

    /// Convenience: symmetric flag detected as exact A == A^T.
    static StdDevProfile from_matrix(Eigen::MatrixXd entries, FamilyTag tag = FamilyTag::custom);

    std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
    bool square() const { return rows() == cols(); }
    bool symmetric() const { return symmetric_; }
    FamilyTag family() const { return tag_; }
    Storage storage() const { return triplets_ ? Storage::sparse : Storage::dense; }

    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::MatrixXd& dense() const { return entries_; }
    std::span<const Triplet> triplets() const;

    std::size_t nonzeros() const { return nnz_; }
    double max_entry() const;

    /// A o A.
    Eigen::MatrixXd variance_profile() const;

    /// Support of A o A as out-lists (weights are a_ij^2) and in-lists.
    AdjacencyList out_adjacency() const;
    AdjacencyList in_adjacency() const;

    StdDevProfile scaled(double c) const;
    /// P A P^T with (P A P^T)_{perm[i], perm[j]} = a_ij.
    StdDevProfile permuted(std::span<const std::size_t> perm) const;
    StdDevProfile transposed() const;

    /// FNV-1a over the dimensions and raw entry bits.
    std::uint64_t hash() const;

private:
    Eigen::MatrixXd entries_;
    FamilyTag tag_;
    bool symmetric_;
    std::size_t nnz_ = 0;
    std::optional<std::vector<Triplet>> triplets_;
};

StdDevProfile make_all_ones(std::size_t n);

/// a_ij = sqrt(v_i w_j) with all components in (0, 1].
StdDevProfile make_separable(std::span<const double> v, std::span<const double> w);

/// a_ij = sqrt(f(i/n, j/n)), i, j = 1..n; f must be positive on the grid.
StdDevProfile make_sampled(const std::function<double(double, double)>& f, std::size_t n);

/// 0/1 band of half-width `band`: cyclic distance min(|i-j|, n-|i-j|) <= band
/// when periodic, |i-j| <= band otherwise. Requires 1 <= band < n.
StdDevProfile make_band(std::size_t n, std::size_t band, bool periodic);

/// Band reflected onto the anti-diagonal: a_ij = band(i, n+1-j).
StdDevProfile make_anti_diagonal(std::size_t n, std::size_t band, bool periodic);

/// Ones on the leading ceil(c n) x ceil(c n) block, `background` elsewhere.
StdDevProfile make_block_sparse(std::size_t n, double c, double background = 0.0);

/// Symmetric profile with entries uniform in [floor, 1], drawn from `seed`.
StdDevProfile make_bounded_below(std::size_t n, double floor, std::uint64_t seed);

struct ErdosRenyiConfig {
    std::size_t n = 0;
    double p = 1.0;
    double gamma = 0.0;
    double alpha = 0.25;
    std::uint64_t seed = 0;

    /// Throws DomainError unless 0 < p <= 1, 0 <= gamma < 1/2,
    /// gamma < alpha < 1/2 and p >= n^-gamma.
    void validate() const;
    /// n^-alpha / p.
    double epsilon() const;
};

/// Adjacency of G(n, p): symmetric 0/1, zero diagonal, bit-reproducible per seed.
StdDevProfile sample_erdos_renyi(const ErdosRenyiConfig& cfg);

enum class Remark42Variant { i, ii, iii };

/// The block counterexamples: (i) and (ii) are 5x5 block patterns of n/5
/// all-ones blocks scaled by 1/sqrt(n); (iii) is [[1, 1], [1, 0]] with an
/// n/4 leading block, unscaled.
StdDevProfile make_remark42(Remark42Variant variant, std::size_t n);

// ---------------------------------------------------------------------------
// Structural predicates.

enum class Verdict {
    holds,          ///< proven by exhaustive check
    not_falsified,  ///< randomised search found no violation
    violated,       ///< witness attached
};

struct Witness {
    enum class Kind { none, row, column, column_set, row_column_sets };
    Kind kind = Kind::none;
    std::size_t index = 0;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
};

struct PredicateResult {
    Verdict verdict = Verdict::holds;
    Witness witness;
    std::size_t candidates_checked = 0;

    explicit operator bool() const { return verdict != Verdict::violated; }
    bool exact() const { return verdict != Verdict::not_falsified; }
};

struct SearchOptions {
    /// Exhaustive subset enumeration up to this many elements.
    std::size_t exact_limit = 12;
    std::size_t random_trials = 2000;
    std::uint64_t seed = 0;
    /// Extra witness sets (0-based column indices) tried before anything else.
    std::vector<std::vector<std::size_t>> candidates;
};

/// |N^(delta)_{A^T}(J)| for the given column set: rows i with
/// |N_A(i) ∩ J| >= delta |J|.
std::size_t broad_neighbourhood_size(const StdDevProfile& a, double delta,
                                     std::span<const std::size_t> cols);

/// Number of pairs (i, j) in I x J with a_ij > 0.
std::size_t edge_count(const StdDevProfile& a, std::span<const std::size_t> rows,
                       std::span<const std::size_t> cols);

PredicateResult is_broadly_connected(const StdDevProfile& a, double delta, double nu,
                                     const SearchOptions& opts = {});

PredicateResult is_super_regular(const StdDevProfile& a, double delta, double epsilon,
                                 const SearchOptions& opts = {});

struct ErdosRenyiReport {
    std::size_t n = 0;
    std::size_t k = 0;
    double p = 0;
    double cycle_sum = 0;          ///< S_k(A)
    double normalised_sum = 0;     ///< S_k / (n p)^k
    double expected_normalised = 0;  ///< |I_k| p^k / (n p)^k
    double max_row_sum = 0;
    double row_sum_cap = 0;        ///< (1 + eps_n) n p
    bool within_cap = false;
};

ErdosRenyiReport check_erdos_renyi_concentration(const ErdosRenyiConfig& cfg, std::size_t k);

// ---------------------------------------------------------------------------
// Plain-text I/O. Dense: "n m symmetric_flag" then n rows of m entries.
// Sparse: "n m nnz" then "i j value" lines, 1-based. Shortest round-trip
// decimal representation, so save/load is exact.

void save_profile(std::ostream& out, const StdDevProfile& a);
StdDevProfile load_profile(std::istream& in);
void save_profile(const std::string& path, const StdDevProfile& a);
StdDevProfile load_profile(const std::string& path);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace vplab
