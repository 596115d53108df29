#include "vplab/entrylaws.hpp"

#include "vplab/errors.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace vplab {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

bool EntryLaw::theorem_compliant() const { return symmetric_law && std::abs(variance - 1.0) < 1e-12; }

std::string EntryLaw::compliance_warning() const {
    if (theorem_compliant()) return {};
    std::string w = "law '" + name + "' is outside the theorem hypotheses:";
    if (!symmetric_law) w += " not symmetric;";
    if (std::abs(variance - 1.0) >= 1e-12) w += " variance " + format_double(variance) + " != 1;";
    w.pop_back();
    return w;
}

EntryLaw law_gaussian() {
    return EntryLaw{"gaussian",
                    [](double z) { return z; },
                    [](double) { return 1.0; },
                    [](double) { return 0.0; },
                    1.0,
                    0.0,
                    true,
                    1.0};
}

EntryLaw law_uniform01() {
    const double c1 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double c2 = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
    return EntryLaw{"uniform01",
                    normal_cdf,
                    normal_pdf,
                    [](double z) { return -z * normal_pdf(z); },
                    c1,
                    c2,
                    false,
                    1.0 / 12.0};
}

EntryLaw law_smooth_symmetric(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("smooth-symmetric eps must lie in [0,1)");
    const double var = 1.0 + 2.0 * eps * std::exp(-0.5) + eps * eps * (1.0 - std::exp(-2.0)) / 2.0;
    const double beta = 1.0 / std::sqrt(var);
    return EntryLaw{"smooth-symmetric:eps=" + format_double(eps),
                    [beta, eps](double z) { return beta * (z + eps * std::sin(z)); },
                    [beta, eps](double z) { return beta * (1.0 + eps * std::cos(z)); },
                    [beta, eps](double z) { return -beta * eps * std::sin(z); },
                    beta * (1.0 + eps),
                    beta * eps,
                    true,
                    1.0};
}

EntryLaw parse_law(std::string_view spec) {
    if (spec == "gaussian") return law_gaussian();
    if (spec == "uniform01") return law_uniform01();
    constexpr std::string_view prefix = "smooth-symmetric:eps=";
    if (spec.starts_with(prefix)) {
        const std::string_view v = spec.substr(prefix.size());
        double eps = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), eps);
        if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw DomainError("bad eps in law string '" + std::string(spec) + "'");
        return law_smooth_symmetric(eps);
    }
    throw DomainError("unknown law '" + std::string(spec) +
                      "' (expected gaussian | uniform01 | smooth-symmetric:eps=<v>)");
}

GridCheck verify_law(const EntryLaw& law) {
    GridCheck g;
    for (int t = -8000; t <= 8000; ++t) {
        const double x = t * 1e-3;
        g.max_du = std::max(g.max_du, std::abs(law.du(x)));
        g.max_d2u = std::max(g.max_d2u, std::abs(law.d2u(x)));
        if (law.symmetric_law && law.u(-x) != -law.u(x)) g.odd_ok = false;
    }
    g.c1_ok = g.max_du <= law.c1 * (1.0 + 1e-9);
    g.c2_ok = g.max_d2u <= law.c2 * (1.0 + 1e-9);
    return g;
}

std::string_view to_string(EnsembleKind kind) { return kind == EnsembleKind::iid ? "iid" : "symmetric"; }

EnsembleKind ensemble_from_string(std::string_view name) {
    if (name == "iid") return EnsembleKind::iid;
    if (name == "symmetric") return EnsembleKind::symmetric;
    throw DomainError("unknown ensemble kind '" + std::string(name) + "' (expected iid | symmetric)");
}

Eigen::MatrixXd sample_matrix(const MatrixEnsemble& ens, std::size_t n, std::size_t replica, Stream stream) {
    if (n == 0) throw DomainError("matrix size must be positive");
    const CounterRng rng(ens.seed);
    const auto sz = static_cast<Eigen::Index>(n);
    const auto rep = static_cast<std::uint32_t>(replica);
    Eigen::MatrixXd x(sz, sz);
    if (ens.kind == EnsembleKind::symmetric) {
        for (Eigen::Index j = 0; j < sz; ++j)
            for (Eigen::Index i = 0; i <= j; ++i)
                x(i, j) = x(j, i) =
                    ens.law.u(rng.gaussian(rep, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), stream));
    } else {
        for (Eigen::Index j = 0; j < sz; ++j)
            for (Eigen::Index i = 0; i < sz; ++i)
                x(i, j) = ens.law.u(rng.gaussian(rep, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), stream));
    }
    return x;
}

Eigen::MatrixXd assemble(const StdDevProfile& a, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.rows()) != a.rows() || static_cast<std::size_t>(x.cols()) != a.cols())
        throw SizeError("profile and matrix dimensions differ");
    return a.dense().cwiseProduct(x);
}

}  // namespace vplab
