// Tridiagonal noise precision matrix: weak form of the 1-D reaction-diffusion
// operator a_diff·(-d^2/dt^2) + a_react on the time axis, assembled in the
// piecewise-linear hat basis with natural boundary conditions.
#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "oedpath/errors.hpp"

namespace oed {

struct NoisePrecision {
    int n_t = 0;
    double dt = 0.0;
    double a_diffusion = 1.0;
    double a_reaction = 100.0;
    Eigen::VectorXd diag;     // n_t entries
    Eigen::VectorXd offdiag;  // n_t - 1 entries

    // Cholesky factor of the precision: Sigma^-1 = L L^T, L lower bidiagonal.
    // Empty when the bands are not positive definite (e.g. the pure stiffness
    // matrix a_react = 0, which is singular); solve/sampling then fail.
    bool positive_definite = false;
    Eigen::VectorXd chol_diag;
    Eigen::VectorXd chol_off;

    /// Sigma^-1 · v (tridiagonal matvec).
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

    /// Sigma · v, i.e. solve (L L^T) x = v. O(n_t). Requires SPD bands.
    Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

    /// Applies Sigma^-1 to every column.
    Eigen::MatrixXd apply_matrix(const Eigen::MatrixXd& m) const;
};

/// Closed-form hat-function integrals:
///   diag    a_diff·2/dt + a_react·2dt/3   (a_diff/dt + a_react·dt/3 at ends)
///   offdiag -a_diff/dt + a_react·dt/6
NoisePrecision build_noise_precision(int n_t, double dt, double a_diffusion = 1.0,
                                     double a_reaction = 100.0);

/// Precision with explicit bands; factored immediately, with the outcome
/// recorded in positive_definite.
NoisePrecision noise_precision_from_bands(double dt, Eigen::VectorXd diag,
                                          Eigen::VectorXd offdiag);

/// Draw eta ~ N(0, Sigma) through the precision factor: eta = L^-T z.
Eigen::VectorXd sample_noise(const NoisePrecision& noise, std::uint64_t seed);

}  // namespace oed
