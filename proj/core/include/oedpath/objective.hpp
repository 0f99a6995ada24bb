// Composes controls -> path -> G -> posterior -> utility + regularization,
// with the analytic gradient chained through the measurement derivatives and
// the rollout adjoint.
#pragma once

#include <memory>
#include <vector>

#include "oedpath/bayes.hpp"
#include "oedpath/obstacles.hpp"

namespace oed {

enum class Criterion { A, D };

struct ControlBounds {
    double v_lo = 0.05;
    double v_hi = 0.2;
    double omega_lo = -2.0;
    double omega_hi = 2.0;

    void validate() const {
        if (!(v_lo <= v_hi) || !(omega_lo <= omega_hi)) {
            throw ConfigError("ControlBounds: lower bound exceeds upper bound");
        }
    }
};

/// One OED instance: everything needed to score a control vector. The
/// sensor's initial position is part of the instance and held fixed during
/// optimization.
struct DesignProblem {
    std::shared_ptr<const StateEnsemble> ensemble;
    MeasurementKernel kernel;
    NoisePrecision noise;
    GaussianPrior prior;
    ObstacleSet obstacles;
    Vec2 start = Vec2::Zero();
    Criterion criterion = Criterion::A;
    double gamma = 0.1;
    RegularizationWeights reg_weights;
    ControlBounds bounds;
    int n_t = 0;
    double dt = 0.0;
    bool minimize_log_det = false;  // D criterion: optimize log Psi_D instead

    void validate() const;
};

struct ObjectiveReport {
    double total = 0.0;           // utility + regularization
    double utility = 0.0;         // Psi per the problem criterion
    double regularization = 0.0;
    double barrier = 0.0;         // filled by the optimizer, 0 otherwise
    double psi_a = 0.0;
    double psi_d = 0.0;
    Eigen::VectorXd spectrum;     // posterior eigenvalues, descending
    bool feasible = true;
    double min_margin = 0.0;      // exact constraint margin minimum
    std::vector<int> infeasible_constraints;  // unique constraint indices
};

ObjectiveReport evaluate(const DesignProblem& problem, const ControlVector& controls);

struct ObjectiveGradient {
    ObjectiveReport report;
    ControlGradient controls;          // d total / d controls
    std::vector<Vec2> positions;       // d utility / d p_k (before the adjoint)
};

ObjectiveGradient gradient(const DesignProblem& problem, const ControlVector& controls);

/// Per-position utility gradient of Proposition-4.2 form, exploiting that
/// perturbing p_k changes only row k of G; exposed for the optimizer and for
/// oracle tests against the dense trace formula.
std::vector<Vec2> utility_position_gradient(const DesignProblem& problem,
                                            const PosteriorModel& post,
                                            const Eigen::MatrixXd& G,
                                            const ObservationDerivatives& dG);

/// The scalar the optimizer minimizes for this problem's criterion.
double criterion_utility(const DesignProblem& problem, const PosteriorModel& post);

/// Assembles the report fields from an already-computed posterior.
ObjectiveReport build_report(const DesignProblem& problem, const PosteriorModel& post,
                             const ControlVector& controls, const SensorPath& path);

}  // namespace oed
