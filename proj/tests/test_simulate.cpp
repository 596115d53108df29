#include "vplab/errors.hpp"
#include "vplab/rng.hpp"
#include "vplab/simulate.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace vplab;

namespace {

Eigen::MatrixXd random_matrix(int n, std::uint64_t seed) {
    const CounterRng rng(seed);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = 2 * rng.uniform(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0, Stream::profile) - 1;
    return m;
}

double triple_loop_trace(const Eigen::MatrixXd& m) {
    double s = 0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.rows(); ++j)
            for (int l = 0; l < m.rows(); ++l) s += m(i, j) * m(j, l) * m(l, i);
    return s;
}

Eigen::MatrixXd swap2() {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

}  // namespace

TEST_CASE("power_traces examples") {
    CHECK(power_traces(swap2(), 4) == std::vector<double>{0, 2, 0, 2});
    for (double t : power_traces(Eigen::MatrixXd::Identity(6, 6), 7)) CHECK(t == 6);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = random_matrix(5, seed);
        CHECK(power_traces(m, 3)[2] == doctest::Approx(triple_loop_trace(m)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(power_traces(Eigen::MatrixXd::Zero(2, 3), 2), SizeError);
    CHECK_THROWS_AS(power_traces(swap2(), 0), DomainError);
}

TEST_CASE("power_traces agrees with repeated multiplication") {
    const auto m = random_matrix(9, 42);
    const auto tr = power_traces(m, 10);
    Eigen::MatrixXd p = m;
    for (std::size_t j = 1; j <= 10; ++j) {
        CHECK(tr[j - 1] == doctest::Approx(p.trace()).epsilon(1e-10));
        p = p * m;
    }
}

TEST_CASE("trace_poly examples") {
    CHECK(trace_poly(swap2(), PolynomialSpec::monomial(2)) == 2);
    CHECK(trace_poly(Eigen::MatrixXd::Identity(3, 3), PolynomialSpec({-1, 0, 1})) == 0);
    CHECK_THROWS_AS(PolynomialSpec({1.0}), DomainError);
    CHECK_THROWS_AS(PolynomialSpec({1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(PolynomialSpec({3.0, 1.0}, 2.0), DomainError);
    CHECK_THROWS_AS(PolynomialSpec({1.0, NAN}), DomainError);
}

TEST_CASE("PolynomialSpec") {
    const PolynomialSpec p({2, -3, 1});
    CHECK(p.degree() == 2);
    CHECK(p.tau() == 3);
    CHECK(p(0.5) == doctest::Approx(2 - 1.5 + 0.25));
    const auto q = p.composed(3);
    CHECK(q.degree() == 6);
    CHECK(q.tau() == 3);
    CHECK(q.coeffs() == std::vector<double>{2, 0, 0, -3, 0, 0, 1});
    CHECK(q(1.1) == doctest::Approx(p(std::pow(1.1, 3))));
    CHECK_THROWS_AS(p.composed(0), DomainError);
    CHECK(PolynomialSpec::monomial(4).coeffs() == std::vector<double>{0, 0, 0, 0, 1});
}

TEST_CASE("run_batch structural zeros") {
    const MatrixEnsemble ens{EnsembleKind::symmetric, law_gaussian(), 1};
    const auto zero = StdDevProfile::from_matrix(Eigen::MatrixXd::Zero(8, 8));
    CHECK_THROWS_AS(run_batch(zero, ens, PolynomialSpec({1, 1, 1}), 50, 1), StructuralZeroVariance);

    const auto r42 = make_remark42(Remark42Variant::ii, 10);
    const MatrixEnsemble iid{EnsembleKind::iid, law_gaussian(), 1};
    try {
        run_batch(r42, r42.symmetric() ? ens : iid, PolynomialSpec::monomial(3), 40, 3);
        FAIL("expected StructuralZeroVariance");
    } catch (const StructuralZeroVariance& e) {
        REQUIRE(e.raw_traces().size() == 40);
        for (double t : e.raw_traces()) CHECK(std::abs(t - e.raw_traces().front()) <= 1e-12);
    }
}

TEST_CASE("run_batch all-ones standardisation") {
    const MatrixEnsemble ens{EnsembleKind::symmetric, law_gaussian(), 7};
    const auto b = run_batch(make_all_ones(200), ens, PolynomialSpec::monomial(2), 1000, 7);
    REQUIRE(b.z_samples.size() == 1000);
    const double mean = std::accumulate(b.z_samples.begin(), b.z_samples.end(), 0.0) / 1000;
    double var = 0;
    for (double z : b.z_samples) var += (z - mean) * (z - mean);
    var /= 999;
    CHECK(std::abs(mean) <= 0.1);
    CHECK(std::abs(var - 1) <= 0.15);
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(std::abs(var - 1) <= 1e-12);
    CHECK(b.mean_se == doctest::Approx(std::sqrt(b.var_hat / 1000)));
    CHECK(b.var_se > 0);
    CHECK(b.warnings.empty());
    CHECK(b.fingerprint.n == 200);
    CHECK(b.fingerprint.law == law_gaussian().name);
    // Tr Y^2 = sum_ij X_ij^2 with X symmetric: E = n^2, Var = 4 n(n-1) + 2n (Gaussian).
    CHECK(std::abs(b.mean_hat - 40000) <= 5 * b.mean_se);
    CHECK(std::abs(b.var_hat - (4.0 * 200 * 199 + 2 * 200)) <= 5 * b.var_se);
}

TEST_CASE("run_batch is deterministic and seed-sensitive") {
    const MatrixEnsemble ens{EnsembleKind::iid, law_uniform01(), 0};
    const auto a = make_band(30, 2, true);
    const auto p = PolynomialSpec({0, 1, 0.5, 0.25});
    const auto b1 = run_batch(a, ens, p, 60, 11);
    const auto b2 = run_batch(a, ens, p, 60, 11);
    const auto b3 = run_batch(a, ens, p, 60, 12);
    CHECK(b1.raw_traces == b2.raw_traces);
    CHECK(b1.raw_traces != b3.raw_traces);
    CHECK(b1.fingerprint.seed == 11);
    CHECK_FALSE(b1.warnings.empty());

    // Replica r is a pure function of (seed, r).
    const MatrixEnsemble seeded{EnsembleKind::iid, law_uniform01(), 11};
    CHECK(b1.raw_traces[17] == trace_poly(assemble(a, sample_matrix(seeded, 30, 17)), p));
}

TEST_CASE("run_batch errors") {
    const MatrixEnsemble sym{EnsembleKind::symmetric, law_gaussian(), 1};
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(4, 4);
    m(0, 1) = 0.5;
    CHECK_THROWS_AS(run_batch(StdDevProfile::from_matrix(m), sym, PolynomialSpec::monomial(2), 10, 1), DomainError);
    CHECK_THROWS_AS(run_batch(StdDevProfile::from_matrix(Eigen::MatrixXd::Ones(3, 4)), sym,
                              PolynomialSpec::monomial(2), 10, 1),
                    SizeError);
    CHECK_THROWS_AS(standardise({1.0}), DomainError);
}

TEST_CASE("structural_zero_check examples") {
    const auto r42 = make_remark42(Remark42Variant::ii, 10);
    for (std::size_t k : {1, 2, 3, 4, 6}) CHECK(structural_zero_check(r42, k, 20));
    CHECK_FALSE(structural_zero_check(r42, 5, 20));
    CHECK_FALSE(structural_zero_check(make_all_ones(6), 2, 20));
    CHECK(support_forbids_closed_walks(r42, 3));
    CHECK_FALSE(support_forbids_closed_walks(r42, 10));
    // The band keeps its diagonal, so loops give closed walks of every length.
    CHECK_FALSE(support_forbids_closed_walks(make_band(6, 1, true), 3));
}

TEST_CASE("trace is invariant under matched relabelling") {
    const MatrixEnsemble ens{EnsembleKind::symmetric, law_gaussian(), 3};
    const auto a = make_band(12, 2, false);
    const std::vector<std::size_t> perm{5, 0, 11, 3, 7, 1, 10, 2, 9, 4, 8, 6};
    const Eigen::MatrixXd x = sample_matrix(ens, 12, 0);
    Eigen::MatrixXd xp(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) xp(static_cast<int>(perm[i]), static_cast<int>(perm[j])) = x(i, j);
    const auto p = PolynomialSpec({1, -1, 2, 0, 1});
    CHECK(trace_poly(assemble(a.permuted(perm), xp), p) ==
          doctest::Approx(trace_poly(assemble(a, x), p)).epsilon(1e-12));
}

TEST_CASE("batch export") {
    const MatrixEnsemble ens{EnsembleKind::symmetric, law_gaussian(), 2};
    const auto b = run_batch(make_all_ones(10), ens, PolynomialSpec::monomial(2), 5, 2);
    std::ostringstream csv;
    write_batch_csv(csv, b);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "replica,raw_trace,z");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);

    const auto j = nlohmann::json::parse(batch_json(b));
    for (const char* key : {"fingerprint", "mean_hat", "var_hat", "mean_se", "var_se", "warnings"})
        CHECK(j.contains(key));
    CHECK(j["fingerprint"]["replicas"] == 5);
    CHECK(j["var_hat"].get<double>() == b.var_hat);
}
