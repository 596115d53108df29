#include "vplab/cycles.hpp"
#include "vplab/errors.hpp"
#include "vplab/profiles.hpp"
#include "vplab/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

using namespace vplab;

namespace {

Eigen::MatrixXd row_sums(const StdDevProfile& a) { return a.dense().rowwise().sum(); }

void check_invariants(const StdDevProfile& a) {
    CHECK((a.dense().array() >= 0.0).all());
    CHECK(a.dense().allFinite());
    if (a.symmetric()) {
        REQUIRE(a.square());
        CHECK(a.dense() == a.dense().transpose());
    }
}

StdDevProfile random_01(std::size_t n, std::size_t m, double density, std::uint64_t seed) {
    const CounterRng rng(seed);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (rng.uniform(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0, Stream::profile) < density)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    return StdDevProfile::from_matrix(std::move(a));
}

std::vector<std::size_t> members(std::uint64_t mask, std::size_t size) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size; ++i)
        if (mask >> i & 1) out.push_back(i);
    return out;
}

// Direct transcription of the two definitions, every subset enumerated.
bool brute_broadly_connected(const StdDevProfile& a, double delta, double nu) {
    const std::size_t n = a.rows(), m = a.cols();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t deg = 0;
        for (std::size_t j = 0; j < m; ++j) deg += a(i, j) > 0;
        if (deg < delta * m) return false;
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t deg = 0;
        for (std::size_t i = 0; i < n; ++i) deg += a(i, j) > 0;
        if (deg < delta * n) return false;
    }
    for (std::uint64_t mask = 1; mask < (1ULL << m); ++mask) {
        const auto J = members(mask, m);
        std::size_t nb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t hit = 0;
            for (auto j : J) hit += a(i, j) > 0;
            if (hit >= delta * J.size()) ++nb;
        }
        if (nb < std::min<double>(n, (1 + nu) * J.size())) return false;
    }
    return true;
}

bool brute_super_regular(const StdDevProfile& a, double delta, double eps) {
    const std::size_t n = a.rows(), m = a.cols();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t deg = 0;
        for (std::size_t j = 0; j < m; ++j) deg += a(i, j) > 0;
        if (deg < delta * m) return false;
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t deg = 0;
        for (std::size_t i = 0; i < n; ++i) deg += a(i, j) > 0;
        if (deg < delta * n) return false;
    }
    for (std::uint64_t mi = 1; mi < (1ULL << n); ++mi) {
        const auto I = members(mi, n);
        if (I.size() < eps * n) continue;
        for (std::uint64_t mj = 1; mj < (1ULL << m); ++mj) {
            const auto J = members(mj, m);
            if (J.size() < eps * m) continue;
            if (edge_count(a, I, J) < delta * I.size() * J.size()) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("make_separable") {
    const std::vector<double> ones{1, 1, 1};
    CHECK(make_separable(ones, ones).dense() == Eigen::MatrixXd::Ones(3, 3));
    const std::vector<double> q{0.25};
    CHECK(make_separable(q, q)(0, 0) == doctest::Approx(0.25));
    const std::vector<double> v{0.5, 1.0};
    const auto a = make_separable(v, v);
    CHECK(a(0, 1) == doctest::Approx(0.70710678118654752));
    CHECK(a.family() == FamilyTag::separable);
    CHECK(a.symmetric());
    check_invariants(a);

    const std::vector<double> zero{0.0, 1.0}, big{1.0, 1.5};
    CHECK_THROWS_AS(make_separable(zero, v), DomainError);
    CHECK_THROWS_AS(make_separable(v, big), DomainError);

    const std::vector<double> w{0.5, 1.0, 0.75};
    const auto r = make_separable(v, w);
    CHECK(r.rows() == 2);
    CHECK(r.cols() == 3);
    CHECK_FALSE(r.symmetric());
}

TEST_CASE("make_sampled") {
    CHECK(make_sampled([](double, double) { return 1.0; }, 2).dense() == Eigen::MatrixXd::Ones(2, 2));
    const auto a = make_sampled([](double x, double y) { return x * y + 0.5; }, 2);
    CHECK(a(1, 1) == doctest::Approx(std::sqrt(1.5)));
    CHECK(a.family() == FamilyTag::sampled);
    CHECK_THROWS_AS(make_sampled([](double x, double) { return x - 0.5; }, 4), DomainError);

    // f = g(x) h(y) agrees with the separable constructor on the same grid.
    auto g = [](double x) { return 0.5 + x / 2; };
    auto h = [](double y) { return (1 + y) / 2; };
    std::vector<double> gv, hv;
    for (int i = 1; i <= 5; ++i) {
        gv.push_back(g(i / 5.0));
        hv.push_back(h(i / 5.0));
    }
    const auto s = make_sampled([&](double x, double y) { return g(x) * h(y); }, 5);
    const auto p = make_separable(gv, hv);
    CHECK((s.dense() - p.dense()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("make_band") {
    const auto a = make_band(6, 1, true);
    for (int i = 0; i < 6; ++i) CHECK(row_sums(a)(i) == 3);
    CHECK(a.family() == FamilyTag::band_periodic);
    CHECK(make_band(5, 4, true).dense() == Eigen::MatrixXd::Ones(5, 5));
    CHECK(make_band(5, 4, false).dense() == Eigen::MatrixXd::Ones(5, 5));
    const auto b = make_band(6, 1, false);
    const std::vector<double> expect{2, 3, 3, 3, 3, 2};
    for (int i = 0; i < 6; ++i) CHECK(row_sums(b)(i) == expect[static_cast<std::size_t>(i)]);
    CHECK_THROWS_AS(make_band(6, 6, true), DomainError);
    CHECK_THROWS_AS(make_band(6, 0, true), DomainError);

    // Periodic support is exactly the cyclic distance rule.
    const auto c = make_band(11, 3, true);
    for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 11; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            CHECK(c(i, j) == (std::min(d, 11 - d) <= 3 ? 1.0 : 0.0));
        }
    CHECK(make_band(7, 6, true).dense() == Eigen::MatrixXd::Ones(7, 7));
    check_invariants(c);
}

TEST_CASE("anti-diagonal band reflects the band") {
    const auto a = make_anti_diagonal(8, 2, true);
    const auto b = make_band(8, 2, true);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(a(i, j) == b(i, 7 - j));
    CHECK(a.family() == FamilyTag::anti_diagonal);
    check_invariants(a);
}

TEST_CASE("block sparse and bounded below") {
    const auto a = make_block_sparse(10, 0.25, 0.0);
    CHECK(a.dense().sum() == 9);  // ceil(2.5) = 3
    CHECK(a.storage() == Storage::sparse);
    CHECK(make_block_sparse(10, 0.4, 0.0).storage() == Storage::dense);
    const auto big = make_block_sparse(100, 0.2, 0.0);
    CHECK(big.storage() == Storage::sparse);
    CHECK(big.triplets().size() == 400);

    const auto b = make_bounded_below(30, 0.3, 5);
    CHECK(b.dense().minCoeff() >= 0.3);
    CHECK(b.dense().maxCoeff() <= 1.0);
    check_invariants(b);
    CHECK(make_bounded_below(30, 0.3, 5).dense() == b.dense());
}

TEST_CASE("sample_erdos_renyi") {
    ErdosRenyiConfig full{20, 1.0, 0.0, 0.25, 3};
    const auto a = sample_erdos_renyi(full);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Ones(20, 20);
    expect.diagonal().setZero();
    CHECK(a.dense() == expect);
    CHECK(a.family() == FamilyTag::erdos_renyi);

    ErdosRenyiConfig cfg{500, 0.3, 0.25, 0.35, 11};
    const auto g = sample_erdos_renyi(cfg);
    check_invariants(g);
    CHECK(g.dense().diagonal().isZero());
    CHECK(sample_erdos_renyi(cfg).dense() == g.dense());
    // Mean row sum is 2E/n with E ~ Bin(n(n-1)/2, p).
    const double pairs = 500.0 * 499.0 / 2.0;
    const double sd = 2.0 * std::sqrt(pairs * 0.3 * 0.7) / 500.0;
    CHECK(std::abs(g.dense().sum() / 500.0 - 0.3 * 499) <= 3 * sd);

    CHECK_THROWS_AS((ErdosRenyiConfig{100, 0.0, 0.1, 0.3, 0}.validate()), DomainError);
    CHECK_THROWS_AS((ErdosRenyiConfig{100, 0.5, 0.5, 0.3, 0}.validate()), DomainError);
    CHECK_THROWS_AS((ErdosRenyiConfig{100, 0.5, 0.2, 0.1, 0}.validate()), DomainError);
    CHECK_THROWS_AS((ErdosRenyiConfig{100, 0.01, 0.2, 0.3, 0}.validate()), DomainError);
    CHECK(ErdosRenyiConfig{100, 0.5, 0.2, 0.3, 0}.epsilon() == doctest::Approx(std::pow(100.0, -0.3) / 0.5));
}

TEST_CASE("make_remark42") {
    const auto ii = make_remark42(Remark42Variant::ii, 10);
    const double s = 1 / std::sqrt(10.0);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            const bool on = (j / 2 + 5 - i / 2) % 5 == 1;
            CHECK(ii(i, j) == doctest::Approx(on ? s : 0.0));
        }
    CHECK(ii.family() == FamilyTag::remark42_ii);

    const auto i1 = make_remark42(Remark42Variant::i, 10);
    for (std::size_t b = 0; b < 5; ++b)
        CHECK(i1.dense().block(static_cast<Eigen::Index>(2 * b), static_cast<Eigen::Index>(2 * b), 2, 2).isZero());
    CHECK(i1.nonzeros() == 40);

    const auto iii = make_remark42(Remark42Variant::iii, 8);
    CHECK(iii.dense().topLeftCorner(2, 2) == Eigen::MatrixXd::Ones(2, 2));
    CHECK(iii.dense().bottomRightCorner(6, 6).isZero());
    CHECK(iii.dense().topRightCorner(2, 6) == Eigen::MatrixXd::Ones(2, 6));
    CHECK(iii.symmetric());

    CHECK_THROWS_AS(make_remark42(Remark42Variant::ii, 12), DomainError);
    CHECK_THROWS_AS(make_remark42(Remark42Variant::iii, 10), DomainError);
}

TEST_CASE("broad connectivity examples") {
    const auto ones = make_all_ones(6);
    const auto r = is_broadly_connected(ones, 1.0, 1.0 - 1.0 / 6);
    CHECK(r.verdict == Verdict::holds);
    CHECK(bool(r));

    // Remark 4.2(iii), n = 8: J = {3..8} has only n/4 broad neighbours.
    const auto iii = make_remark42(Remark42Variant::iii, 8);
    const std::vector<std::size_t> J{2, 3, 4, 5, 6, 7};
    CHECK(broad_neighbourhood_size(iii, 0.25, J) == 2);
    SearchOptions opts;
    opts.candidates = {J};
    const auto w = is_broadly_connected(iii, 0.25, 0.1, opts);
    CHECK(w.verdict == Verdict::violated);
    CHECK(w.witness.kind == Witness::Kind::column_set);
    CHECK(w.witness.cols == J);
    const auto plain = is_broadly_connected(iii, 0.25, 0.1);
    CHECK(plain.verdict == Verdict::violated);
    CHECK(broad_neighbourhood_size(iii, 0.25, plain.witness.cols) <
          std::min(8.0, 1.1 * static_cast<double>(plain.witness.cols.size())));

    const StdDevProfile zero = StdDevProfile::from_matrix(Eigen::MatrixXd::Zero(4, 4));
    const auto z = is_broadly_connected(zero, 0.5, 0.5);
    CHECK(z.verdict == Verdict::violated);
    CHECK(z.witness.kind == Witness::Kind::row);

    CHECK_THROWS_AS(is_broadly_connected(ones, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(is_broadly_connected(ones, 0.5, 1.0), DomainError);
}

TEST_CASE("super regularity examples") {
    CHECK(is_super_regular(make_all_ones(7), 1.0, 0.3).verdict == Verdict::holds);
    const StdDevProfile zero = StdDevProfile::from_matrix(Eigen::MatrixXd::Zero(4, 4));
    CHECK_FALSE(is_super_regular(zero, 0.5, 0.5));

    // The O block of Remark 4.2(iii) has no edges: I = J = {3..8}.
    const auto iii = make_remark42(Remark42Variant::iii, 8);
    const auto r = is_super_regular(iii, 0.25, 0.7);
    CHECK(r.verdict == Verdict::violated);
    CHECK(r.witness.kind == Witness::Kind::row_column_sets);
    CHECK(edge_count(iii, r.witness.rows, r.witness.cols) <
          0.25 * static_cast<double>(r.witness.rows.size() * r.witness.cols.size()));
    const std::vector<std::size_t> O{2, 3, 4, 5, 6, 7};
    CHECK(edge_count(iii, O, O) == 0);
    CHECK_THROWS_AS(is_super_regular(iii, 0.5, 0.0), DomainError);
}

TEST_CASE("predicates agree with subset enumeration") {
    int disagreements = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const std::size_t n = 3 + seed % 6;
        const std::size_t m = 3 + (seed / 6) % 6;
        const auto a = random_01(n, m, 0.5 + 0.4 * static_cast<double>(seed % 3) / 2, seed);
        for (double delta : {0.2, 0.4, 0.6}) {
            const auto bc = is_broadly_connected(a, delta, 0.2);
            CHECK(bc.exact());
            disagreements += bool(bc) != brute_broadly_connected(a, delta, 0.2);
            for (double eps : {0.3, 0.6}) {
                const auto sr = is_super_regular(a, delta, eps);
                CHECK(sr.exact());
                disagreements += bool(sr) != brute_super_regular(a, delta, eps);
            }
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("large predicates fall back to randomized search") {
    const auto ones = make_all_ones(20);
    const auto r = is_broadly_connected(ones, 0.5, 0.5);
    CHECK(r.verdict == Verdict::not_falsified);
    CHECK_FALSE(r.exact());
    // Remark 4.2(iii) at n = 40 is still caught without a supplied witness.
    const auto iii = make_remark42(Remark42Variant::iii, 40);
    CHECK(is_broadly_connected(iii, 0.25, 0.1).verdict == Verdict::violated);
    CHECK(is_super_regular(iii, 0.25, 0.7).verdict == Verdict::violated);
}

TEST_CASE("Erdos-Renyi concentration report") {
    const auto full = check_erdos_renyi_concentration({30, 1.0, 0.0, 0.25, 1}, 3);
    CHECK(full.normalised_sum == doctest::Approx(distinct_tuple_fraction(30, 3)));
    CHECK(full.expected_normalised == doctest::Approx(30.0 * 29 * 28 / (30.0 * 30 * 30)));
    CHECK(full.max_row_sum == 29);
    CHECK(full.within_cap);
}

TEST_CASE("transforms and hash") {
    const auto a = random_01(6, 6, 0.5, 3);
    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    const auto p = a.permuted(perm);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(p(perm[i], perm[j]) == a(i, j));
    CHECK(a.transposed().dense() == a.dense().transpose());
    CHECK(a.scaled(2.0).dense() == 2.0 * a.dense());
    CHECK(a.hash() == random_01(6, 6, 0.5, 3).hash());
    CHECK(a.hash() != p.hash());
    CHECK_THROWS_AS(StdDevProfile::from_matrix(-Eigen::MatrixXd::Ones(2, 2)), DomainError);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Ones(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(StdDevProfile(asym, FamilyTag::custom, true), DomainError);
}

TEST_CASE("adjacency lists") {
    const auto a = make_band(5, 1, false);
    const auto out = a.out_adjacency();
    CHECK(out.vertices() == 5);
    CHECK(out.targets.size() == 13);
    const auto in = make_remark42(Remark42Variant::ii, 10).in_adjacency();
    CHECK(in.targets.size() == 20);
    CHECK(in.weights.front() == doctest::Approx(0.1));
}

TEST_CASE("profile files round-trip exactly") {
    const CounterRng rng(9);
    Eigen::MatrixXd m(4, 3);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = rng.uniform(i, j, 0, Stream::profile) / 3.0;
    const auto dense = StdDevProfile::from_matrix(m);
    std::stringstream s;
    save_profile(s, dense);
    const auto back = load_profile(s);
    CHECK(back.dense() == dense.dense());
    CHECK(back.symmetric() == dense.symmetric());

    const auto sparse = make_band(60, 2, true).scaled(1.0 / 3.0);
    REQUIRE(sparse.storage() == Storage::sparse);
    std::stringstream t;
    save_profile(t, sparse);
    CHECK(t.str().rfind("60 60 300\n", 0) == 0);
    const auto sback = load_profile(t);
    CHECK(sback.dense() == sparse.dense());
    CHECK(sback.symmetric());

    const auto path = (std::filesystem::temp_directory_path() / "vplab_profile_test.txt").string();
    save_profile(path, make_all_ones(3));
    CHECK(load_profile(path).dense() == Eigen::MatrixXd::Ones(3, 3));
    std::filesystem::remove(path);

    std::stringstream bad("2 2 0\n1 2 3\n");
    CHECK_THROWS_AS(load_profile(bad), DomainError);
    std::stringstream neg("1 1 0\n-1\n");
    CHECK_THROWS_AS(load_profile(neg), DomainError);
    CHECK(format_double(0.1) == "0.1");
}
