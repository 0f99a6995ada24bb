// Kernel-weighted measurements of ensemble states along a path: the matrix G
// and its derivative with respect to each path position.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "oedpath/controls.hpp"
#include "oedpath/forward.hpp"
#include "oedpath/kernel.hpp"

namespace oed {

/// G[k][m] is the kernel-weighted measurement of unit state m at time t_k and
/// position p_k. Perturbing p_k only affects row k, so the derivative is kept
/// as two n_t x M matrices whose row k holds dG[k,·]/dp_{k,x} and /dp_{k,y}.
struct ObservationOperator {
    Eigen::MatrixXd G;
    std::vector<double> times;
};

struct ObservationDerivatives {
    Eigen::MatrixXd dx;  // n_t x M
    Eigen::MatrixXd dy;
};

/// Measurement of every unit state at one position and time.
///   pointwise    : bilinear interpolation of the time-interpolated state.
///   gaussian     : kernel-value x cell-area weighted sum over grid nodes
///                  within the truncation radius (zero extension outside).
///   uniform_ball : equal-weight average over the ball quadrature points
///                  (zero extension outside the grid).
Eigen::VectorXd measure(const StateEnsemble& ens, const MeasurementKernel& kernel,
                        const Vec2& pos, double t);

/// d measure / d pos. Gaussian kernels differentiate the kernel analytically;
/// uniform_ball averages the centered-difference state gradient over the
/// ball; pointwise takes the (cellwise-constant) bilinear-interpolant
/// gradient.
Eigen::Matrix<double, 2, Eigen::Dynamic> measure_derivative(const StateEnsemble& ens,
                                                            const MeasurementKernel& kernel,
                                                            const Vec2& pos, double t);

ObservationOperator assemble_G(const StateEnsemble& ens, const MeasurementKernel& kernel,
                               const SensorPath& path);

ObservationDerivatives assemble_dG(const StateEnsemble& ens, const MeasurementKernel& kernel,
                                   const SensorPath& path);

}  // namespace oed
