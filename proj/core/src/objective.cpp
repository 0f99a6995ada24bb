#include "oedpath/objective.hpp"

#include <cmath>

namespace oed {

void DesignProblem::validate() const {
    if (!ensemble) throw ConfigError("DesignProblem: missing ensemble");
    ensemble->validate();
    kernel.validate();
    bounds.validate();
    obstacles.validate();
    if (n_t < 2) throw ConfigError("DesignProblem: n_t must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("DesignProblem: dt must be > 0");
    if (noise.n_t != n_t) {
        throw ConfigError("DesignProblem: noise precision has n_t = " +
                          std::to_string(noise.n_t) + " but the path has n_t = " +
                          std::to_string(n_t));
    }
    if (prior.size() != ensemble->M) {
        throw ConfigError("DesignProblem: prior dimension " + std::to_string(prior.size()) +
                          " does not match ensemble M = " + std::to_string(ensemble->M));
    }
    if ((n_t - 1) * dt > ensemble->final_time() * (1.0 + 1e-12) + 1e-12) {
        throw ConfigError("DesignProblem: observation window exceeds ensemble final time");
    }
    if (gamma < 0.0) throw ConfigError("DesignProblem: gamma must be >= 0");
}

double criterion_utility(const DesignProblem& problem, const PosteriorModel& post) {
    if (problem.criterion == Criterion::A) return post.psi_a;
    return problem.minimize_log_det ? post.log_psi_d : post.psi_d;
}

ObjectiveReport build_report(const DesignProblem& problem, const PosteriorModel& post,
                             const ControlVector& controls, const SensorPath& path) {
    ObjectiveReport rep;
    rep.utility = criterion_utility(problem, post);
    rep.regularization =
        regularization(controls, problem.dt, problem.gamma, problem.reg_weights).value;
    rep.total = rep.utility + rep.regularization;
    rep.psi_a = post.psi_a;
    rep.psi_d = post.psi_d;
    rep.spectrum = post.eigenvalues;

    const ConstraintValues cons = constraint_eval(problem.obstacles, path);
    rep.min_margin = cons.min_margin;
    rep.feasible = cons.feasible();
    if (!rep.feasible) {
        for (int j = 0; j < cons.margins.rows(); ++j) {
            if (cons.margins.row(j).minCoeff() < 0.0) rep.infeasible_constraints.push_back(j);
        }
    }
    return rep;
}

ObjectiveReport evaluate(const DesignProblem& problem, const ControlVector& controls) {
    problem.validate();
    const SensorPath path = rollout(controls, problem.n_t, problem.dt);
    const ObservationOperator op = assemble_G(*problem.ensemble, problem.kernel, path);
    const PosteriorModel post = posterior(fisher_matrix(op.G, problem.noise), problem.prior);
    return build_report(problem, post, controls, path);
}

std::vector<Vec2> utility_position_gradient(const DesignProblem& problem,
                                            const PosteriorModel& post,
                                            const Eigen::MatrixXd& G,
                                            const ObservationDerivatives& dG) {
    const int n_t = static_cast<int>(G.rows());
    // B = Sigma_noise^-1 G once per call; each (k, i) trace is then a
    // length-M dot product against row k.
    const Eigen::MatrixXd B = problem.noise.apply_matrix(G);
    Eigen::MatrixXd weight;  // n_t x M
    double scale = -2.0;
    if (problem.criterion == Criterion::A) {
        weight = B * (post.post_cov * post.post_cov);
    } else {
        weight = B * post.post_cov;
        if (!problem.minimize_log_det) scale *= post.psi_d;
    }
    std::vector<Vec2> grad(n_t);
    for (int k = 0; k < n_t; ++k) {
        grad[k].x() = scale * dG.dx.row(k).dot(weight.row(k));
        grad[k].y() = scale * dG.dy.row(k).dot(weight.row(k));
    }
    return grad;
}

ObjectiveGradient gradient(const DesignProblem& problem, const ControlVector& controls) {
    problem.validate();
    const SensorPath path = rollout(controls, problem.n_t, problem.dt);
    const ObservationOperator op = assemble_G(*problem.ensemble, problem.kernel, path);
    const ObservationDerivatives dG = assemble_dG(*problem.ensemble, problem.kernel, path);
    const PosteriorModel post = posterior(fisher_matrix(op.G, problem.noise), problem.prior);

    ObjectiveGradient out;
    out.report = build_report(problem, post, controls, path);
    out.positions = utility_position_gradient(problem, post, op.G, dG);
    out.controls = rollout_adjoint(controls, path, out.positions);

    const RegularizationValue reg =
        regularization(controls, problem.dt, problem.gamma, problem.reg_weights);
    out.controls.v += reg.gradient.v;
    out.controls.omega += reg.gradient.omega;
    return out;
}

}  // namespace oed
