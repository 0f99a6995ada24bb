#include "oedpath/controls.hpp"

#include <cmath>

#include "oedpath/errors.hpp"

namespace oed {

void ControlVector::validate(int n_t) const {
    if (n_t < 2) throw ConfigError("ControlVector: n_t must be >= 2");
    const std::size_t steps = static_cast<std::size_t>(n_t - 1);
    if (omega.size() != steps) {
        throw ConfigError("ControlVector: omega must have n_t - 1 entries");
    }
    if (constant_speed ? v.size() != 1 : v.size() != steps) {
        throw ConfigError("ControlVector: v must have 1 (constant-speed) or n_t - 1 entries");
    }
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(x0.x()) || !finite(x0.y()) || !finite(theta0)) {
        throw ConfigError("ControlVector: non-finite initial state");
    }
    for (double x : v) {
        if (!finite(x)) throw ConfigError("ControlVector: non-finite speed entry");
    }
    for (double x : omega) {
        if (!finite(x)) throw ConfigError("ControlVector: non-finite angular velocity entry");
    }
}

SensorPath rollout(const ControlVector& controls, int n_t, double dt) {
    controls.validate(n_t);
    if (!(dt > 0.0)) throw ConfigError("rollout: dt must be > 0");

    SensorPath path;
    path.times.resize(n_t);
    path.positions.resize(n_t);
    path.headings.resize(n_t);
    path.times[0] = 0.0;
    path.positions[0] = controls.x0;
    path.headings[0] = controls.theta0;
    for (int k = 1; k < n_t; ++k) {
        const double vk = controls.speed(k - 1);
        const double th = path.headings[k - 1];
        path.times[k] = k * dt;
        path.positions[k] =
            path.positions[k - 1] + dt * vk * Vec2(std::cos(th), std::sin(th));
        path.headings[k] = th + dt * controls.omega[k - 1];
    }
    return path;
}

ControlGradient rollout_adjoint(const ControlVector& controls, const SensorPath& path,
                                const std::vector<Vec2>& grad_wrt_positions) {
    const int n_t = path.n_t();
    controls.validate(n_t);
    if (grad_wrt_positions.size() != static_cast<std::size_t>(n_t)) {
        throw ConfigError("rollout_adjoint: position gradient must have n_t entries");
    }
    const double dt = path.dt();

    ControlGradient grad;
    grad.v = Eigen::VectorXd::Zero(static_cast<int>(controls.v.size()));
    grad.omega = Eigen::VectorXd::Zero(n_t - 1);

    // lam_p and lam_th hold the total sensitivities dJ/dp_k and dJ/dtheta_k
    // of the level currently being processed.
    Vec2 lam_p = grad_wrt_positions[n_t - 1];
    double lam_th = 0.0;
    for (int k = n_t - 1; k >= 1; --k) {
        const double th = path.headings[k - 1];
        const double vk = controls.speed(k - 1);
        const Vec2 dir(std::cos(th), std::sin(th));
        const Vec2 dir_perp(-std::sin(th), std::cos(th));

        const double gv = dt * lam_p.dot(dir);
        if (controls.constant_speed) {
            grad.v[0] += gv;
        } else {
            grad.v[k - 1] = gv;
        }
        grad.omega[k - 1] = dt * lam_th;

        lam_th += dt * vk * lam_p.dot(dir_perp);
        lam_p += grad_wrt_positions[k - 1];
    }
    grad.x0 = lam_p;
    grad.theta0 = lam_th;
    return grad;
}

RegularizationValue regularization(const ControlVector& controls, double dt, double gamma,
                                   const RegularizationWeights& weights) {
    if (gamma < 0.0) throw ConfigError("regularization: gamma must be >= 0");
    const int steps = controls.num_steps();
    controls.validate(steps + 1);

    double v_term = 0.0;
    for (int k = 0; k < steps; ++k) v_term += controls.speed(k) * controls.speed(k);
    v_term *= dt;

    double w_term = 0.0;
    double jump_term = 0.0;
    for (int k = 0; k < steps; ++k) w_term += controls.omega[k] * controls.omega[k];
    w_term *= dt;
    for (int k = 0; k + 1 < steps; ++k) {
        const double d = controls.omega[k + 1] - controls.omega[k];
        jump_term += d * d;
    }

    RegularizationValue out;
    out.value = gamma * (weights.w_v * v_term + weights.w_omega * w_term +
                         weights.w_jump * jump_term);

    out.gradient.v = Eigen::VectorXd::Zero(static_cast<int>(controls.v.size()));
    out.gradient.omega = Eigen::VectorXd::Zero(steps);
    for (int k = 0; k < steps; ++k) {
        const double g = gamma * weights.w_v * 2.0 * dt * controls.speed(k);
        if (controls.constant_speed) {
            out.gradient.v[0] += g;
        } else {
            out.gradient.v[k] = g;
        }
        out.gradient.omega[k] = gamma * weights.w_omega * 2.0 * dt * controls.omega[k];
    }
    for (int k = 0; k + 1 < steps; ++k) {
        const double d = controls.omega[k + 1] - controls.omega[k];
        out.gradient.omega[k + 1] += gamma * weights.w_jump * 2.0 * d;
        out.gradient.omega[k] -= gamma * weights.w_jump * 2.0 * d;
    }
    return out;
}

}  // namespace oed
