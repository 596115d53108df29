#pragma once

#include "vplab/profiles.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>

namespace vplab {

/// Distinct-index cycle sum
///   S_k(A) = sum over pairwise-distinct (i_1..i_k) of a_{i1 i2}^2 ... a_{ik i1}^2.
struct CycleSumResult {
    enum class Method { brute, dfs };

    std::size_t k = 0;
    double value = 0.0;
    std::uint64_t terms_visited = 0;
    Method method = Method::dfs;
};

/// |I_k| = n (n-1) ... (n-k+1); zero when k > n.
boost::multiprecision::cpp_int count_Ik(std::size_t n, std::size_t k);

/// |I_k| / n^k = prod_{t<k} (1 - t/n), evaluated in double.
double distinct_tuple_fraction(std::size_t n, std::size_t k);

/// Enumerates all n^k tuples and keeps the distinct ones. Refuses with
/// SizeError when n^k > 1e8.
CycleSumResult cycle_sum_brute(const StdDevProfile& a, std::size_t k);

/// Depth-first enumeration of simple closed walks over the support of A o A.
/// Each cycle is enumerated once from its minimal vertex and weighted by k.
/// Roots run in parallel; partial sums are reduced in root order.
/// Refuses with SizeError when k > 10.
CycleSumResult cycle_sum_dfs(const StdDevProfile& a, std::size_t k);

/// Tr((A o A)^k): the unrestricted closed-walk sum, an upper bound on S_k.
double walk_sum_trace(const StdDevProfile& a, std::size_t k);

}  // namespace vplab
