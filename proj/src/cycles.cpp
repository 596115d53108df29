#include "vplab/cycles.hpp"

#include "vplab/errors.hpp"
#include "vplab/parallel.hpp"

#include <cmath>
#include <vector>

namespace vplab {
namespace {

// Neumaier compensated accumulator in extended precision.
class CompensatedSum {
public:
    void add(long double x) {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    long double value() const { return sum_ + comp_; }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

void require_square(const StdDevProfile& a) {
    if (!a.square()) throw SizeError("cycle sums need a square profile");
}

}  // namespace

boost::multiprecision::cpp_int count_Ik(std::size_t n, std::size_t k) {
    boost::multiprecision::cpp_int out = 1;
    if (k > n) return 0;
    for (std::size_t t = 0; t < k; ++t) out *= (n - t);
    return out;
}

double distinct_tuple_fraction(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t t = 0; t < k; ++t) r *= 1.0 - static_cast<double>(t) / static_cast<double>(n);
    return r;
}

CycleSumResult cycle_sum_brute(const StdDevProfile& a, std::size_t k) {
    require_square(a);
    if (k == 0) throw DomainError("k must be >= 1");
    const std::size_t n = a.rows();
    if (std::pow(static_cast<double>(n), static_cast<double>(k)) > 1e8)
        throw SizeError("brute-force cycle sum refuses n^k > 1e8");

    const Eigen::MatrixXd b = a.variance_profile();
    CycleSumResult res{k, 0.0, 0, CycleSumResult::Method::brute};
    CompensatedSum sum;
    std::vector<std::size_t> idx(k, 0);
    std::vector<unsigned> used(n, 0);
    for (;;) {
        ++res.terms_visited;
        bool distinct = true;
        for (auto i : idx)
            if (used[i]++) distinct = false;
        for (auto i : idx) used[i] = 0;
        if (distinct) {
            long double prod = 1.0L;
            for (std::size_t t = 0; t < k; ++t)
                prod *= b(static_cast<Eigen::Index>(idx[t]), static_cast<Eigen::Index>(idx[(t + 1) % k]));
            sum.add(prod);
        }
        std::size_t pos = 0;
        while (pos < k && ++idx[pos] == n) idx[pos++] = 0;
        if (pos == k) break;
    }
    res.value = static_cast<double>(sum.value());
    return res;
}

CycleSumResult cycle_sum_dfs(const StdDevProfile& a, std::size_t k) {
    require_square(a);
    if (k == 0) throw DomainError("k must be >= 1");
    if (k > 10) throw SizeError("DFS cycle sum is limited to k <= 10");
    const std::size_t n = a.rows();
    CycleSumResult res{k, 0.0, 0, CycleSumResult::Method::dfs};

    if (k == 1) {
        CompensatedSum sum;
        for (std::size_t i = 0; i < n; ++i) sum.add(static_cast<long double>(a(i, i)) * a(i, i));
        res.value = static_cast<double>(sum.value());
        res.terms_visited = n;
        return res;
    }

    const AdjacencyList out = a.out_adjacency();
    const AdjacencyList in = a.in_adjacency();

    std::vector<long double> partial(n, 0.0L);
    std::vector<std::uint64_t> visited(n, 0);

    parallel_for(n, [&](std::size_t root) {
        // closing[v] = a_{v,root}^2, the weight of the edge back to the root.
        std::vector<double> closing(n, 0.0);
        for (std::size_t e = in.offsets[root]; e < in.offsets[root + 1]; ++e) closing[in.targets[e]] = in.weights[e];
        std::vector<char> on_path(n, 0);
        on_path[root] = 1;
        CompensatedSum sum;
        std::uint64_t nodes = 0;

        auto dfs = [&](auto&& self, std::size_t v, std::size_t depth, long double weight) -> void {
            ++nodes;
            if (depth == k) {
                if (closing[v] != 0.0) sum.add(weight * closing[v]);
                return;
            }
            for (std::size_t e = out.offsets[v]; e < out.offsets[v + 1]; ++e) {
                const std::size_t w = out.targets[e];
                if (w <= root || on_path[w]) continue;
                on_path[w] = 1;
                self(self, w, depth + 1, weight * out.weights[e]);
                on_path[w] = 0;
            }
        };
        dfs(dfs, root, 1, 1.0L);
        partial[root] = sum.value();
        visited[root] = nodes;
    });

    CompensatedSum total;
    for (std::size_t r = 0; r < n; ++r) {
        total.add(partial[r]);
        res.terms_visited += visited[r];
    }
    res.value = static_cast<double>(total.value() * static_cast<long double>(k));
    return res;
}

double walk_sum_trace(const StdDevProfile& a, std::size_t k) {
    require_square(a);
    if (k == 0) throw DomainError("k must be >= 1");
    const Eigen::MatrixXd b = a.variance_profile();
    Eigen::MatrixXd p = b;
    for (std::size_t t = 1; t < k; ++t) p = p * b;
    return p.trace();
}

}  // namespace vplab
