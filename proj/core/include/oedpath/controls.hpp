// Unicycle control parameterization, explicit-Euler rollout, reverse-mode
// sensitivity of the rollout, and the control regularization term.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "oedpath/grid.hpp"

namespace oed {

/// Controls (x0, theta0, v, omega) of the unicycle model. v and omega are
/// piecewise constant over the n_t - 1 path intervals; in constant-speed mode
/// v holds a single entry broadcast to every step.
struct ControlVector {
    Vec2 x0 = Vec2::Zero();
    double theta0 = 0.0;
    std::vector<double> v;
    std::vector<double> omega;
    bool constant_speed = false;

    int num_steps() const { return static_cast<int>(omega.size()); }
    double speed(int k) const { return constant_speed ? v[0] : v[k]; }

    static ControlVector constant(Vec2 x0, double theta0, double v0, double omega0, int n_steps,
                                  bool constant_speed = true) {
        ControlVector c;
        c.x0 = x0;
        c.theta0 = theta0;
        c.constant_speed = constant_speed;
        c.v.assign(constant_speed ? 1 : n_steps, v0);
        c.omega.assign(n_steps, omega0);
        return c;
    }

    void validate(int n_t) const;
};

/// Discrete path: positions and headings at uniform times t_k = (k-1)·dt.
struct SensorPath {
    std::vector<double> times;
    std::vector<Vec2> positions;
    std::vector<double> headings;

    int n_t() const { return static_cast<int>(times.size()); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Forward Euler: p_1 = x0, theta_1 = theta0,
///   theta_k = theta_{k-1} + dt·omega_{k-1},
///   p_k     = p_{k-1} + dt·v_{k-1}·(cos theta_{k-1}, sin theta_{k-1}).
SensorPath rollout(const ControlVector& controls, int n_t, double dt);

/// Gradient of a scalar J with respect to the controls, given dJ/dp_k (and
/// optionally dJ/dtheta_k), by exact reverse-mode accumulation through the
/// Euler recursion.
struct ControlGradient {
    Vec2 x0 = Vec2::Zero();
    double theta0 = 0.0;
    Eigen::VectorXd v;      // same length as controls.v
    Eigen::VectorXd omega;  // n_t - 1
};

ControlGradient rollout_adjoint(const ControlVector& controls, const SensorPath& path,
                                const std::vector<Vec2>& grad_wrt_positions);

/// Weights of the three regularization terms
///   w_v·dt·sum v_k^2 + w_omega·dt·sum omega_k^2
///   + w_jump·sum (omega_{k+1} - omega_k)^2.
struct RegularizationWeights {
    double w_v = 1.0;
    double w_omega = 1.0;
    double w_jump = 1.0;
};

struct RegularizationValue {
    double value = 0.0;  // gamma times the weighted sum
    ControlGradient gradient;
};

RegularizationValue regularization(const ControlVector& controls, double dt, double gamma,
                                   const RegularizationWeights& weights = {});

}  // namespace oed
