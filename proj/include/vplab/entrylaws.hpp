#pragma once

#include "vplab/profiles.hpp"
#include "vplab/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace vplab {

/// Law of u(Z) for standard Gaussian Z, with |u'| <= c1 and |u''| <= c2.
///
/// Laws are user-extensible: supply u and its first two derivatives. The
/// derivative bounds are checked on a grid, not proven.
struct EntryLaw {
    std::string name;
    std::function<double(double)> u;
    std::function<double(double)> du;
    std::function<double(double)> d2u;
    double c1 = 0.0;
    double c2 = 0.0;
    bool symmetric_law = false;  ///< u odd, so the law is symmetric about 0
    double variance = 0.0;       ///< Var u(Z), exact

    /// Symmetric with unit variance: the hypothesis of the TV bound.
    bool theorem_compliant() const;

    /// Human-readable reason when not theorem_compliant(), empty otherwise.
    std::string compliance_warning() const;
};

EntryLaw law_gaussian();

/// u = Phi, so u(Z) is uniform on [0,1]. Not symmetric, variance 1/12.
EntryLaw law_uniform01();

/// u(z) = beta (z + eps sin z), beta = (1 + 2 eps e^{-1/2} + eps^2 (1 - e^{-2}) / 2)^{-1/2}.
EntryLaw law_smooth_symmetric(double eps);

/// "gaussian" | "uniform01" | "smooth-symmetric:eps=<v>". DomainError otherwise.
EntryLaw parse_law(std::string_view spec);

struct GridCheck {
    double max_du = 0.0;
    double max_d2u = 0.0;
    bool c1_ok = false;
    bool c2_ok = false;
    bool odd_ok = true;  ///< u(-x) == -u(x) on the grid, only meaningful for symmetric laws
};

/// Samples |u'|, |u''| on [-8, 8] with spacing 1e-3 and compares with
/// c1, c2 at relative slack 1e-9.
GridCheck verify_law(const EntryLaw& law);

enum class EnsembleKind { iid, symmetric };

std::string_view to_string(EnsembleKind kind);
EnsembleKind ensemble_from_string(std::string_view name);

/// X with entries u(Z_ij). Z_ij is drawn from Philox keyed by `seed` with
/// counter (replica, i, j); for the symmetric kind only i <= j are drawn.
struct MatrixEnsemble {
    EnsembleKind kind = EnsembleKind::symmetric;
    EntryLaw law = law_gaussian();
    std::uint64_t seed = 0;

    /// Correlation of (X_ij, X_ji): 1 for symmetric, 0 for iid.
    int rho() const { return kind == EnsembleKind::symmetric ? 1 : 0; }
};

Eigen::MatrixXd sample_matrix(const MatrixEnsemble& ens, std::size_t n, std::size_t replica,
                              Stream stream = Stream::entries);

/// Y = A o X. Zeros of A stay exact zeros.
Eigen::MatrixXd assemble(const StdDevProfile& a, const Eigen::MatrixXd& x);

}  // namespace vplab
