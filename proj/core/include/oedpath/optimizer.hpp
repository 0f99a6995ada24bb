// Reduced-space OED solver: log-barrier interior loop around a projected
// L-BFGS inner solver, grid-search initialization, and warm-started time-grid
// refinement. The initial position is held fixed; speed and angular-velocity
// bounds are enforced by projection, path constraints by the barrier.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oedpath/objective.hpp"

namespace oed {

enum class OptimizeStatus { optimal, acceptable, max_iter, infeasible_start };

std::string to_string(OptimizeStatus status);

/// How the termination stationarity is measured.
///   barrier_free    : |projected gradient of utility + regularization|_inf
///                     plus the complementarity estimate mu / g_min.
///   barrier_gradient: |projected gradient of the barrier objective|_inf
///                     plus mu (central-path complementarity gap).
enum class StationarityMode { barrier_free, barrier_gradient };

struct BarrierSettings {
    double mu0 = 1.0;
    double mu_shrink = 0.2;
    double mu_min = 1e-10;
    double tol_optimal = 1e-8;      // "optimal" below this
    double tol_acceptable = 1e-6;   // "acceptable" when sustained
    int acceptable_iters = 15;      // consecutive iterations for "acceptable"
    int max_outer = 80;
    int max_inner = 200;            // per outer round
    int max_total_inner = 20000;
    int lbfgs_memory = 20;
    double armijo_c = 1e-4;
    double fraction_to_boundary = 0.995;
    double inner_tol_floor = 1e-12;  // tol_inner = max(0.1 mu, floor)
    StationarityMode stationarity_mode = StationarityMode::barrier_free;
    bool verbose = false;
};

struct HistoryRow {
    int iter = 0;
    double mu = 0.0;
    double total = 0.0;
    double utility = 0.0;
    double regularization = 0.0;
    double stationarity = 0.0;
    double min_margin = 0.0;
};

/// Quasi-Newton curvature pairs and barrier weight exported for warm starts.
struct WarmStart {
    double mu = -1.0;  // < 0: use settings.mu0
    std::vector<Eigen::VectorXd> s;
    std::vector<Eigen::VectorXd> y;
};

struct OptimizeResult {
    ControlVector controls;
    SensorPath path;
    OptimizeStatus status = OptimizeStatus::max_iter;
    int iterations = 0;       // accepted inner iterations
    int function_evals = 0;
    int gradient_evals = 0;
    double final_stationarity = std::numeric_limits<double>::infinity();
    double constraint_violation = 0.0;  // exact (non-smoothed) evaluation
    double min_margin_seen = 0.0;       // over all accepted iterates
    double final_mu = 0.0;
    ObjectiveReport final_report;
    std::vector<HistoryRow> history;
    WarmStart warm_out;  // state at the final iterate
    std::string message;
};

OptimizeResult optimize(const DesignProblem& problem, const ControlVector& initial,
                        const BarrierSettings& settings, const WarmStart* warm = nullptr);

/// Constant-control sweep over initial heading x angular velocity. Cells
/// whose rollout violates any exact constraint are masked. Local minima are
/// feasible cells strictly below all feasible 8-neighbors (at least one
/// feasible neighbor required; plateaus yield none), on the problem's
/// criterion.
struct GridSearchResult {
    std::vector<double> theta_values;
    std::vector<double> omega_values;
    Eigen::MatrixXd psi_a;                      // theta index x omega index
    Eigen::MatrixXd psi_d;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;

    struct Minimum {
        int i_theta = 0;
        int i_omega = 0;
        double theta0 = 0.0;
        double omega0 = 0.0;
        double utility = 0.0;
    };
    std::vector<Minimum> local_minima;  // sorted by utility, best first
};

GridSearchResult grid_search(const DesignProblem& problem, const std::vector<double>& theta_grid,
                             const std::vector<double>& omega_grid, double v_const,
                             int threads = 1);

/// Halved-step problem with piecewise-constant controls duplicated onto the
/// refined grid, the noise precision rebuilt, and the barrier weight plus
/// quasi-Newton curvature mapped from the coarse solve.
struct RefinedStart {
    DesignProblem problem;
    ControlVector controls;
    WarmStart warm;
};

RefinedStart refine_warmstart(const DesignProblem& problem, const OptimizeResult& coarse,
                              int refinement_factor = 2);

/// Re-rollout of fixed control functions on successively finer time grids;
/// errors are measured against the finest level.
struct ConvergenceRow {
    double dt = 0.0;
    int n_t = 0;
    double psi_a = 0.0;
    double grad_norm = 0.0;   // control-space L2 norm of the A-utility gradient
    double error = 0.0;       // |psi_a - psi_a(finest)|
    double grad_error = 0.0;  // |grad_norm - grad_norm(finest)|
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // coarsest first; last row is the reference
    std::vector<double> error_ratios;  // successive psi_a error ratios
};

ConvergenceTable convergence_study(const DesignProblem& problem, const ControlVector& base,
                                   int levels, double refine_factor = std::sqrt(2.0));

}  // namespace oed
