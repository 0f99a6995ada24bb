#include "oedpath/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <limits>

#include "oedpath/parallel.hpp"

namespace oed {

std::string to_string(OptimizeStatus status) {
    switch (status) {
        case OptimizeStatus::optimal: return "optimal";
        case OptimizeStatus::acceptable: return "acceptable";
        case OptimizeStatus::max_iter: return "max_iter";
        case OptimizeStatus::infeasible_start: return "infeasible_start";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Packed optimization variables: [theta0, v (1 or n_steps), omega (n_steps)].
// The initial position is not a variable.
struct VarLayout {
    bool constant_speed = false;
    int n_steps = 0;

    int nv() const { return constant_speed ? 1 : n_steps; }
    int dim() const { return 1 + nv() + n_steps; }
    int v_begin() const { return 1; }
    int omega_begin() const { return 1 + nv(); }

    Eigen::VectorXd pack(const ControlVector& c) const {
        Eigen::VectorXd z(dim());
        z[0] = c.theta0;
        for (int i = 0; i < nv(); ++i) z[v_begin() + i] = c.v[i];
        for (int i = 0; i < n_steps; ++i) z[omega_begin() + i] = c.omega[i];
        return z;
    }

    ControlVector unpack(const Eigen::VectorXd& z, const Vec2& x0) const {
        ControlVector c;
        c.x0 = x0;
        c.theta0 = z[0];
        c.constant_speed = constant_speed;
        c.v.assign(z.data() + v_begin(), z.data() + v_begin() + nv());
        c.omega.assign(z.data() + omega_begin(), z.data() + omega_begin() + n_steps);
        return c;
    }

    Eigen::VectorXd pack_grad(const ControlGradient& g) const {
        Eigen::VectorXd z(dim());
        z[0] = g.theta0;
        z.segment(v_begin(), nv()) = g.v;
        z.segment(omega_begin(), n_steps) = g.omega;
        return z;
    }

    void make_bounds(const ControlBounds& b, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
        lo = Eigen::VectorXd::Constant(dim(), -kInf);
        hi = Eigen::VectorXd::Constant(dim(), kInf);
        lo.segment(v_begin(), nv()).setConstant(b.v_lo);
        hi.segment(v_begin(), nv()).setConstant(b.v_hi);
        lo.segment(omega_begin(), n_steps).setConstant(b.omega_lo);
        hi.segment(omega_begin(), n_steps).setConstant(b.omega_hi);
    }
};

struct BarrierEval {
    bool interior = false;
    double f = kInf;        // utility + regularization
    double phi = kInf;      // f - mu * sum log g_smooth
    double barrier = 0.0;   // -sum log g_smooth
    double g_min_smooth = -kInf;
    ObjectiveReport report;
    Eigen::VectorXd grad_f;    // packed, without barrier terms
    Eigen::VectorXd grad_phi;  // packed
};

class BarrierProblem {
public:
    BarrierProblem(const DesignProblem& problem, const VarLayout& layout)
        : problem_(problem), layout_(layout) {}

    BarrierEval eval(const Eigen::VectorXd& z, double mu, bool with_grad) const {
        BarrierEval e;
        const ControlVector controls = layout_.unpack(z, problem_.start);
        const SensorPath path = rollout(controls, problem_.n_t, problem_.dt);
        const ConstraintValues smooth = constraint_eval_smooth(problem_.obstacles, path);
        e.g_min_smooth = smooth.min_margin;
        if (!(smooth.min_margin > 0.0)) return e;  // outside the barrier domain

        const ObservationOperator op = assemble_G(*problem_.ensemble, problem_.kernel, path);
        const PosteriorModel post =
            posterior(fisher_matrix(op.G, problem_.noise), problem_.prior);
        e.report = build_report(problem_, post, controls, path);
        e.f = e.report.total;
        e.barrier = -smooth.margins.array().log().sum();
        e.phi = e.f + mu * e.barrier;
        e.report.barrier = mu * e.barrier;
        e.interior = true;

        if (with_grad) {
            const ObservationDerivatives dG =
                assemble_dG(*problem_.ensemble, problem_.kernel, path);
            const std::vector<Vec2> upos = utility_position_gradient(problem_, post, op.G, dG);
            ControlGradient cg = rollout_adjoint(controls, path, upos);
            const RegularizationValue reg =
                regularization(controls, problem_.dt, problem_.gamma, problem_.reg_weights);
            cg.v += reg.gradient.v;
            cg.omega += reg.gradient.omega;
            cg.theta0 += reg.gradient.theta0;
            e.grad_f = layout_.pack_grad(cg);

            std::vector<Vec2> bpos(path.n_t(), Vec2::Zero());
            for (int k = 0; k < path.n_t(); ++k) {
                for (int j = 0; j < smooth.margins.rows(); ++j) {
                    const double w = -1.0 / smooth.margins(j, k);
                    bpos[k] += w * Vec2(smooth.grad_x(j, k), smooth.grad_y(j, k));
                }
            }
            const ControlGradient bg = rollout_adjoint(controls, path, bpos);
            e.grad_phi = e.grad_f + mu * layout_.pack_grad(bg);
        }
        return e;
    }

    // Smooth margins only; the cheap part of an evaluation, used by the
    // fraction-to-boundary clipping.
    Eigen::MatrixXd smooth_margins(const Eigen::VectorXd& z) const {
        const ControlVector controls = layout_.unpack(z, problem_.start);
        const SensorPath path = rollout(controls, problem_.n_t, problem_.dt);
        return constraint_eval_smooth(problem_.obstacles, path).margins;
    }

private:
    const DesignProblem& problem_;
    VarLayout layout_;
};

Eigen::VectorXd clamp(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
    return z.cwiseMax(lo).cwiseMin(hi);
}

// |P(z - g) - z|_inf : the projected-gradient displacement.
double projected_gradient_norm(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return (z - clamp(z - g, lo, hi)).cwiseAbs().maxCoeff();
}

class LbfgsMemory {
public:
    explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

    void push(Eigen::VectorXd s, Eigen::VectorXd y) {
        const double sy = s.dot(y);
        if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // skip bad curvature
        s_.push_back(std::move(s));
        y_.push_back(std::move(y));
        rho_.push_back(1.0 / sy);
        if (static_cast<int>(s_.size()) > capacity_) {
            s_.pop_front();
            y_.pop_front();
            rho_.pop_front();
        }
    }

    void seed(const std::vector<Eigen::VectorXd>& s, const std::vector<Eigen::VectorXd>& y) {
        for (std::size_t i = 0; i < s.size() && i < y.size(); ++i) push(s[i], y[i]);
    }

    void clear() {
        s_.clear();
        y_.clear();
        rho_.clear();
    }

    bool empty() const { return s_.empty(); }

    void export_pairs(std::vector<Eigen::VectorXd>& s, std::vector<Eigen::VectorXd>& y) const {
        s.assign(s_.begin(), s_.end());
        y.assign(y_.begin(), y_.end());
    }

    // Two-loop recursion; returns H·g (approximate inverse Hessian action).
    Eigen::VectorXd apply(const Eigen::VectorXd& g) const {
        Eigen::VectorXd q = g;
        const int m = static_cast<int>(s_.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_[i] * s_[i].dot(q);
            q -= alpha[i] * y_[i];
        }
        if (m > 0) {
            const double gamma = s_.back().dot(y_.back()) / y_.back().squaredNorm();
            q *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_[i] * y_[i].dot(q);
            q += (alpha[i] - beta) * s_[i];
        }
        return q;
    }

private:
    int capacity_;
    std::deque<Eigen::VectorXd> s_, y_;
    std::deque<double> rho_;
};

}  // namespace

OptimizeResult optimize(const DesignProblem& problem, const ControlVector& initial,
                        const BarrierSettings& settings, const WarmStart* warm) {
    problem.validate();
    initial.validate(problem.n_t);

    VarLayout layout;
    layout.constant_speed = initial.constant_speed;
    layout.n_steps = problem.n_t - 1;

    Eigen::VectorXd lo, hi;
    layout.make_bounds(problem.bounds, lo, hi);
    Eigen::VectorXd z = clamp(layout.pack(initial), lo, hi);

    BarrierProblem barrier(problem, layout);

    OptimizeResult result;
    result.final_mu = (warm && warm->mu > 0.0) ? warm->mu : settings.mu0;

    // Strict feasibility of the start, in both the exact margins (the
    // problem statement) and the smoothed ones (the barrier domain).
    {
        const ControlVector c0 = layout.unpack(z, problem.start);
        const SensorPath p0 = rollout(c0, problem.n_t, problem.dt);
        const double exact0 = constraint_eval(problem.obstacles, p0).min_margin;
        const double smooth0 = constraint_eval_smooth(problem.obstacles, p0).min_margin;
        if (!(exact0 > 0.0) || !(smooth0 > 0.0)) {
            result.controls = c0;
            result.path = p0;
            result.status = OptimizeStatus::infeasible_start;
            result.constraint_violation = std::max(0.0, -exact0);
            result.message =
                "initial rollout is not strictly feasible (min margin " +
                std::to_string(std::min(exact0, smooth0)) +
                "); try shrinking the speed toward its lower bound or a feasible "
                "grid-search cell";
            return result;
        }
    }

    LbfgsMemory memory(settings.lbfgs_memory);
    if (warm) memory.seed(warm->s, warm->y);

    double mu = result.final_mu;
    BarrierEval cur = barrier.eval(z, mu, true);
    ++result.function_evals;
    ++result.gradient_evals;
    result.min_margin_seen = cur.report.min_margin;

    int acceptable_streak = 0;
    int polish_rounds = 0;
    bool done = false;
    std::string abort_note;

    auto stationarity = [&](const BarrierEval& e) {
        if (settings.stationarity_mode == StationarityMode::barrier_free) {
            return projected_gradient_norm(z, e.grad_f, lo, hi) +
                   mu / std::max(e.g_min_smooth, 1e-300);
        }
        return projected_gradient_norm(z, e.grad_phi, lo, hi) + mu;
    };

    auto record = [&](const BarrierEval& e, double stat) {
        HistoryRow row;
        row.iter = result.iterations;
        row.mu = mu;
        row.total = e.f;
        row.utility = e.report.utility;
        row.regularization = e.report.regularization;
        row.stationarity = stat;
        row.min_margin = e.report.min_margin;
        result.history.push_back(row);
    };

    // Returns true when a global status was reached.
    auto global_check = [&](const BarrierEval& e) {
        const double stat = stationarity(e);
        result.final_stationarity = stat;
        record(e, stat);
        if (stat < settings.tol_optimal) {
            result.status = OptimizeStatus::optimal;
            return true;
        }
        if (stat < settings.tol_acceptable) {
            if (++acceptable_streak >= settings.acceptable_iters) {
                result.status = OptimizeStatus::acceptable;
                return true;
            }
        } else {
            acceptable_streak = 0;
        }
        return false;
    };

    if (global_check(cur)) done = true;

    for (int outer = 0; outer < settings.max_outer && !done; ++outer) {
        const double tol_inner = std::max(0.1 * mu, settings.inner_tol_floor);
        bool round_converged = false;
        bool made_progress = false;

        for (int inner = 0; inner < settings.max_inner && !done; ++inner) {
            if (result.iterations >= settings.max_total_inner) {
                done = true;
                break;
            }
            if (projected_gradient_norm(z, cur.grad_phi, lo, hi) <= tol_inner) {
                round_converged = true;
                break;
            }

            Eigen::VectorXd d = -memory.apply(cur.grad_phi);
            if (cur.grad_phi.dot(d) >= -1e-14 * cur.grad_phi.norm() * d.norm()) {
                memory.clear();
                d = -cur.grad_phi;
            }

            // Fraction-to-boundary clipping on the cheap margin evaluation.
            const Eigen::MatrixXd m_cur = barrier.smooth_margins(z);
            double alpha = 1.0;
            bool ftb_ok = false;
            for (int t = 0; t < 60; ++t) {
                const Eigen::VectorXd trial = clamp(z + alpha * d, lo, hi);
                const Eigen::MatrixXd m_new = barrier.smooth_margins(trial);
                if (((m_new.array() - (1.0 - settings.fraction_to_boundary) * m_cur.array()) >=
                     0.0)
                        .all()) {
                    ftb_ok = true;
                    break;
                }
                alpha *= 0.5;
            }

            bool accepted = false;
            BarrierEval next;
            Eigen::VectorXd z_next;
            if (ftb_ok) {
                for (int t = 0; t < 40; ++t) {
                    z_next = clamp(z + alpha * d, lo, hi);
                    const Eigen::VectorXd step = z_next - z;
                    if (step.cwiseAbs().maxCoeff() < 1e-18) break;
                    next = barrier.eval(z_next, mu, false);
                    ++result.function_evals;
                    if (next.interior &&
                        next.phi <= cur.phi + settings.armijo_c * cur.grad_phi.dot(step)) {
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }

            if (!accepted) {
                if (memory.empty()) break;  // steepest descent failed: no progress
                memory.clear();             // retry the round with fresh curvature
                continue;
            }

            try {
                next = barrier.eval(z_next, mu, true);
            } catch (const std::exception& e) {
                abort_note = std::string("aborted at iteration ") +
                             std::to_string(result.iterations) + ": " + e.what();
                done = true;
                break;
            }
            ++result.function_evals;
            ++result.gradient_evals;

            memory.push(z_next - z, next.grad_phi - cur.grad_phi);
            z = z_next;
            cur = next;
            ++result.iterations;
            made_progress = true;
            result.min_margin_seen = std::min(result.min_margin_seen, cur.report.min_margin);
            if (global_check(cur)) done = true;
        }

        if (done) break;
        if (mu <= settings.mu_min) {
            ++polish_rounds;
            if (!made_progress || !round_converged || polish_rounds >= 3) break;
        } else {
            mu = std::max(mu * settings.mu_shrink, settings.mu_min);
            result.final_mu = mu;
        }
        if (settings.verbose) {
            std::cerr << "barrier round done: mu=" << mu << " f=" << cur.f
                      << " stat=" << result.final_stationarity << "\n";
        }
    }

    if (result.status != OptimizeStatus::optimal &&
        result.status != OptimizeStatus::acceptable) {
        // Progress exhausted; classify the terminal point.
        result.status = result.final_stationarity < settings.tol_acceptable
                            ? OptimizeStatus::acceptable
                            : OptimizeStatus::max_iter;
    }
    if (!abort_note.empty()) result.message = abort_note;

    result.controls = layout.unpack(z, problem.start);
    result.path = rollout(result.controls, problem.n_t, problem.dt);
    result.final_report = cur.report;
    result.final_mu = mu;
    result.constraint_violation =
        std::max(0.0, -constraint_eval(problem.obstacles, result.path).min_margin);
    result.warm_out.mu = mu;
    memory.export_pairs(result.warm_out.s, result.warm_out.y);
    return result;
}

GridSearchResult grid_search(const DesignProblem& problem, const std::vector<double>& theta_grid,
                             const std::vector<double>& omega_grid, double v_const,
                             int threads) {
    problem.validate();
    if (theta_grid.empty() || omega_grid.empty()) {
        throw ConfigError("grid_search: grids must be non-empty");
    }
    if (v_const < problem.bounds.v_lo || v_const > problem.bounds.v_hi) {
        throw ConfigError("grid_search: v_const outside the speed bounds");
    }

    GridSearchResult res;
    res.theta_values = theta_grid;
    res.omega_values = omega_grid;
    const int nt = static_cast<int>(theta_grid.size());
    const int nw = static_cast<int>(omega_grid.size());
    res.psi_a.setConstant(nt, nw, std::numeric_limits<double>::quiet_NaN());
    res.psi_d.setConstant(nt, nw, std::numeric_limits<double>::quiet_NaN());
    res.feasible.setConstant(nt, nw, false);

    parallel_for(nt * nw, threads, [&](int cell) {
        const int it = cell / nw;
        const int iw = cell % nw;
        const ControlVector controls = ControlVector::constant(
            problem.start, theta_grid[it], v_const, omega_grid[iw], problem.n_t - 1);
        const SensorPath path = rollout(controls, problem.n_t, problem.dt);
        if (!(constraint_eval(problem.obstacles, path).min_margin >= 0.0)) return;
        const ObservationOperator op = assemble_G(*problem.ensemble, problem.kernel, path);
        const PosteriorModel post =
            posterior(fisher_matrix(op.G, problem.noise), problem.prior);
        res.psi_a(it, iw) = post.psi_a;
        res.psi_d(it, iw) = post.psi_d;
        res.feasible(it, iw) = true;
    });

    const Eigen::MatrixXd& util =
        (problem.criterion == Criterion::A) ? res.psi_a : res.psi_d;
    for (int it = 0; it < nt; ++it) {
        for (int iw = 0; iw < nw; ++iw) {
            if (!res.feasible(it, iw)) continue;
            bool strict_min = true;
            int feasible_neighbors = 0;
            for (int a = -1; a <= 1 && strict_min; ++a) {
                for (int b = -1; b <= 1; ++b) {
                    if (a == 0 && b == 0) continue;
                    const int jt = it + a, jw = iw + b;
                    if (jt < 0 || jt >= nt || jw < 0 || jw >= nw) continue;
                    if (!res.feasible(jt, jw)) continue;
                    ++feasible_neighbors;
                    if (!(util(it, iw) < util(jt, jw))) {
                        strict_min = false;
                        break;
                    }
                }
            }
            if (strict_min && feasible_neighbors > 0) {
                res.local_minima.push_back({it, iw, theta_grid[it], omega_grid[iw],
                                            util(it, iw)});
            }
        }
    }
    std::sort(res.local_minima.begin(), res.local_minima.end(),
              [](const auto& a, const auto& b) { return a.utility < b.utility; });
    return res;
}

RefinedStart refine_warmstart(const DesignProblem& problem, const OptimizeResult& coarse,
                              int refinement_factor) {
    if (coarse.status != OptimizeStatus::optimal &&
        coarse.status != OptimizeStatus::acceptable) {
        throw ConfigError("refine_warmstart: coarse result must be optimal or acceptable");
    }
    if (refinement_factor < 2) throw ConfigError("refine_warmstart: factor must be >= 2");

    RefinedStart refined;
    refined.problem = problem;
    const int steps = problem.n_t - 1;
    refined.problem.n_t = steps * refinement_factor + 1;
    refined.problem.dt = problem.dt / refinement_factor;
    refined.problem.noise =
        build_noise_precision(refined.problem.n_t, refined.problem.dt,
                              problem.noise.a_diffusion, problem.noise.a_reaction);

    // Piecewise-constant controls duplicated onto the refined grid.
    refined.controls = coarse.controls;
    refined.controls.omega.clear();
    for (double w : coarse.controls.omega) {
        for (int r = 0; r < refinement_factor; ++r) refined.controls.omega.push_back(w);
    }
    if (!coarse.controls.constant_speed) {
        refined.controls.v.clear();
        for (double v : coarse.controls.v) {
            for (int r = 0; r < refinement_factor; ++r) refined.controls.v.push_back(v);
        }
    }

    // Map the quasi-Newton pairs: a duplicated step entry repeats s and
    // splits y across the children, which preserves every s·y product.
    VarLayout from{coarse.controls.constant_speed, steps};
    VarLayout to{coarse.controls.constant_speed, steps * refinement_factor};
    auto spread = [&](const Eigen::VectorXd& v, double child_weight) {
        Eigen::VectorXd out(to.dim());
        out[0] = v[0];
        if (from.nv() == 1) {
            out[to.v_begin()] = v[from.v_begin()];
        } else {
            for (int i = 0; i < from.nv(); ++i) {
                for (int r = 0; r < refinement_factor; ++r) {
                    out[to.v_begin() + i * refinement_factor + r] =
                        v[from.v_begin() + i] * child_weight;
                }
            }
        }
        for (int i = 0; i < from.n_steps; ++i) {
            for (int r = 0; r < refinement_factor; ++r) {
                out[to.omega_begin() + i * refinement_factor + r] =
                    v[from.omega_begin() + i] * child_weight;
            }
        }
        return out;
    };
    refined.warm.mu = coarse.warm_out.mu;
    for (std::size_t i = 0; i < coarse.warm_out.s.size(); ++i) {
        refined.warm.s.push_back(spread(coarse.warm_out.s[i], 1.0));
        refined.warm.y.push_back(spread(coarse.warm_out.y[i], 1.0 / refinement_factor));
    }
    return refined;
}

ConvergenceTable convergence_study(const DesignProblem& problem, const ControlVector& base,
                                   int levels, double refine_factor) {
    problem.validate();
    if (levels < 3) throw ConfigError("convergence_study: levels must be >= 3");
    if (!(refine_factor > 1.0)) throw ConfigError("convergence_study: factor must be > 1");
    base.validate(problem.n_t);

    const int base_steps = problem.n_t - 1;
    const double horizon = base_steps * problem.dt;

    ConvergenceTable table;
    int steps = base_steps;
    for (int level = 0; level < levels; ++level) {
        DesignProblem p = problem;
        p.n_t = steps + 1;
        p.dt = horizon / steps;
        p.criterion = Criterion::A;
        p.noise = build_noise_precision(p.n_t, p.dt, problem.noise.a_diffusion,
                                        problem.noise.a_reaction);

        // Sample the base piecewise-constant control functions on this grid.
        ControlVector c = base;
        c.omega.resize(steps);
        for (int k = 0; k < steps; ++k) {
            const double t = k * p.dt;
            const int src = std::min(static_cast<int>(t / problem.dt), base_steps - 1);
            c.omega[k] = base.omega[src];
        }
        if (!base.constant_speed) {
            c.v.resize(steps);
            for (int k = 0; k < steps; ++k) {
                const double t = k * p.dt;
                const int src = std::min(static_cast<int>(t / problem.dt), base_steps - 1);
                c.v[k] = base.v[src];
            }
        }

        const ObjectiveGradient g = gradient(p, c);
        ConvergenceRow row;
        row.dt = p.dt;
        row.n_t = p.n_t;
        row.psi_a = g.report.psi_a;
        const double vscale = base.constant_speed ? 1.0 : 1.0 / p.dt;
        row.grad_norm = std::sqrt(g.controls.theta0 * g.controls.theta0 +
                                  vscale * g.controls.v.squaredNorm() +
                                  g.controls.omega.squaredNorm() / p.dt);
        table.rows.push_back(row);

        steps = std::max(steps + 1, static_cast<int>(std::lround(steps * refine_factor)));
    }

    const ConvergenceRow& finest = table.rows.back();
    for (auto& row : table.rows) {
        row.error = std::abs(row.psi_a - finest.psi_a);
        row.grad_error = std::abs(row.grad_norm - finest.grad_norm);
    }
    for (std::size_t j = 0; j + 2 < table.rows.size(); ++j) {
        const double denom = table.rows[j + 1].error;
        table.error_ratios.push_back(denom > 0.0 ? table.rows[j].error / denom : 0.0);
    }
    return table;
}

}  // namespace oed
