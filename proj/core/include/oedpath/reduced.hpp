// Parameter-reduced posterior: PCA basis from prior samples, reduced prior,
// and the reduced posterior for a field-valued initial condition.
#pragma once

#include <cstdint>
#include <vector>

#include "oedpath/bayes.hpp"
#include "oedpath/field_io.hpp"

namespace oed {

/// Orthonormal basis (discrete L2 inner product, weight = cell area) spanning
/// the leading sample directions.
struct ReducedBasis {
    Grid2D grid;
    int M_r = 0;
    std::vector<std::vector<double>> vectors;  // M_r nodal fields
    Eigen::VectorXd singular_values;           // of the weighted sample matrix
    double energy_fraction = 0.0;              // captured / total sample energy

    double cell_area() const { return grid.cell_area(); }

    /// Coefficients <v_i, field> in the weighted inner product.
    Eigen::VectorXd project(const std::vector<double>& field) const;
    std::vector<double> reconstruct(const Eigen::VectorXd& coords) const;
};

/// Top-M_r directions of the (uncentered, mean-zero prior) sample matrix
/// under the discrete L2 weighting. If the samples have rank < M_r the
/// available rank is returned with a warning on stderr.
ReducedBasis pca_basis(const Grid2D& grid, const std::vector<std::vector<double>>& samples,
                       int M_r);

/// Built-in squared-exponential prior covariance on grid nodes. Samples are
/// drawn by dense Cholesky on a coarsened grid and bilinearly prolonged.
struct SquaredExponentialPrior {
    double variance = 1.0;
    double length_scale = 0.25;
    double nugget = 1e-8;
    int sample_grid = 33;  // coarse side length, capped so Cholesky stays desk-size
};

std::vector<std::vector<double>> sample_se_prior(const Grid2D& grid,
                                                 const SquaredExponentialPrior& prior,
                                                 int n_samples, std::uint64_t seed);

/// Reduced prior consistent with the PCA samples: mean zero, covariance
/// diag(s_i^2 / n_samples).
GaussianPrior reduced_prior_from_basis(const ReducedBasis& basis, int n_samples);

/// Identical machinery to the unreduced posterior, with the ensemble built
/// from the basis fields and the supplied reduced prior.
PosteriorModel reduced_posterior(const ReducedBasis& basis, const StateEnsemble& basis_ensemble,
                                 const MeasurementKernel& kernel, const SensorPath& path,
                                 const NoisePrecision& noise,
                                 const GaussianPrior& prior_reduced);

FieldFile to_field_file(const ReducedBasis& basis);
ReducedBasis basis_from_field_file(const FieldFile& file);

}  // namespace oed
