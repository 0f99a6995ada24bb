// Command-line driver: forward solves, measurement export, grid search,
// optimization, warm-started refinement, posterior analysis, SNR, and the
// time-step convergence study. One subcommand per run; outputs are
// plot-ready CSV and OEDF binary files.
#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <cstdio>
#include <iostream>
#include <memory>

#include "oedpath/field_io.hpp"
#include "oedpath/parallel.hpp"
#include "oedpath/scenario.hpp"

using namespace oed;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string ensemble_path;  // optional precomputed ensemble
    std::string path_csv;       // optional path/controls input
    std::string output = "out";
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool dump_config = false;
};

ScenarioConfig load_config(CommonArgs& args) {
    ScenarioConfig cfg = load_scenario(args.config_path);
    if (args.threads > 0) cfg.threads = args.threads;
    if (args.seed_set) cfg.seed = args.seed;
    return cfg;
}

int resolve_threads(const ScenarioConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : default_thread_count();
}

std::shared_ptr<const StateEnsemble> get_ensemble(const ScenarioConfig& cfg,
                                                  const CommonArgs& args) {
    if (!args.ensemble_path.empty()) {
        auto ens = std::make_shared<StateEnsemble>(
            ensemble_from_field_file(read_field_file(args.ensemble_path)));
        return ens;
    }
    return std::make_shared<StateEnsemble>(build_scenario_ensemble(cfg, resolve_threads(cfg)));
}

ControlVector get_controls(const ScenarioConfig& cfg, const CommonArgs& args) {
    if (!args.path_csv.empty()) return read_path_csv(args.path_csv).controls;
    return initial_controls(cfg);
}

void print_report(const ObjectiveReport& rep) {
    std::printf("psi_a = %.17g\n", rep.psi_a);
    std::printf("psi_d = %.17g\n", rep.psi_d);
    std::printf("utility = %.17g\n", rep.utility);
    std::printf("regularization = %.17g\n", rep.regularization);
    std::printf("total = %.17g\n", rep.total);
    std::printf("feasible = %s (min margin %.3e)\n", rep.feasible ? "yes" : "no",
                rep.min_margin);
}

void print_result(const OptimizeResult& res) {
    std::printf("status = %s\n", to_string(res.status).c_str());
    std::printf("iterations = %d (function evals %d, gradient evals %d)\n", res.iterations,
                res.function_evals, res.gradient_evals);
    std::printf("stationarity = %.3e, constraint violation = %.3e\n", res.final_stationarity,
                res.constraint_violation);
    print_report(res.final_report);
}

void write_result(const std::string& prefix, const OptimizeResult& res) {
    write_path_csv(prefix + "_path.csv", res.path, res.controls);
    write_history_csv(prefix + "_history.csv", res.history);
    std::printf("wrote %s_path.csv and %s_history.csv\n", prefix.c_str(), prefix.c_str());
}

int run(CommonArgs& args, const std::string& command,
        const std::function<int(const ScenarioConfig&)>& body) {
    ScenarioConfig cfg = load_config(args);
    if (args.dump_config) {
        std::printf("%s\n", dump_scenario(cfg).c_str());
        return 0;
    }
    (void)command;
    return body(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobile-sensor experimental design for advection-diffusion inverse problems"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* cmd, bool needs_output = false) {
        cmd->add_option("--config", args.config_path, "Scenario configuration (JSON)")
            ->required();
        cmd->add_option("--ensemble", args.ensemble_path,
                        "Precomputed state ensemble (OEDF) instead of a forward solve");
        cmd->add_option("--threads", args.threads, "Worker cap (default: OED_THREADS or cores)");
        cmd->add_option("--seed", args.seed, "Seed override")->each([&](const std::string&) {
            args.seed_set = true;
        });
        cmd->add_flag("--dump-effective-config", args.dump_config,
                      "Print the parsed configuration with defaults filled and exit");
        if (needs_output) {
            cmd->add_option("--output", args.output, "Output file or prefix");
        }
    };

    // forward
    auto* cmd_forward = app.add_subcommand("forward", "Solve the PDE for every basis component "
                                                      "and write the ensemble (OEDF)");
    add_common(cmd_forward, true);
    std::string velocity_out;
    cmd_forward->add_option("--velocity-out", velocity_out, "Also write the velocity field");

    // unit-obs
    auto* cmd_unitobs = app.add_subcommand("unit-obs", "Export the unit observations G along a "
                                                       "path (CSV: t, p, g_1..g_M)");
    add_common(cmd_unitobs, true);
    cmd_unitobs->add_option("--path", args.path_csv, "Path CSV (default: initial controls)");

    // gridsearch
    auto* cmd_grid = app.add_subcommand("gridsearch", "Constant-control sweep over initial "
                                                      "heading and angular velocity");
    add_common(cmd_grid, true);
    int theta_steps = 64, omega_steps = 64;
    double v_const = -1.0;
    cmd_grid->add_option("--theta-steps", theta_steps, "Heading samples in [-pi, pi]");
    cmd_grid->add_option("--omega-steps", omega_steps, "Angular-velocity samples in bounds");
    cmd_grid->add_option("--v", v_const, "Constant speed (default: path.init_v)");

    // optimize
    auto* cmd_opt = app.add_subcommand("optimize", "Barrier optimization from the initial "
                                                   "controls (or --init-path)");
    add_common(cmd_opt, true);
    cmd_opt->add_option("--init-path", args.path_csv, "Warm-start controls from a path CSV");

    // refine
    auto* cmd_refine = app.add_subcommand("refine", "Optimize, then warm-start through "
                                                    "successively halved time steps");
    add_common(cmd_refine, true);
    int stages = 3;
    cmd_refine->add_option("--stages", stages, "Number of refinement stages");
    cmd_refine->add_option("--init-path", args.path_csv, "Warm-start controls from a path CSV");

    // evaluate
    auto* cmd_eval = app.add_subcommand("evaluate", "Evaluate the objective for a path");
    add_common(cmd_eval);
    cmd_eval->add_option("--path", args.path_csv, "Path CSV (default: initial controls)");

    // posterior
    auto* cmd_post = app.add_subcommand("posterior", "Posterior spectrum (and optionally the "
                                                     "mean for synthetic data) along a path");
    add_common(cmd_post, true);
    cmd_post->add_option("--path", args.path_csv, "Path CSV (default: initial controls)");
    std::vector<double> truth;
    cmd_post->add_option("--synthetic-truth", truth,
                         "Draw noisy data for this parameter vector and print the posterior mean");

    // snr
    auto* cmd_snr = app.add_subcommand("snr", "Monte Carlo signal-to-noise ratio per time step");
    add_common(cmd_snr, true);
    int snr_samples = 10000;
    cmd_snr->add_option("--samples", snr_samples, "Monte Carlo sample count");
    cmd_snr->add_option("--path", args.path_csv, "Path CSV (default: initial controls)");

    // convergence
    auto* cmd_conv = app.add_subcommand("convergence", "Time-step convergence study of the "
                                                       "A-utility and its gradient");
    add_common(cmd_conv, true);
    int levels = 4;
    double factor = std::sqrt(2.0);
    cmd_conv->add_option("--levels", levels, "Refinement levels");
    cmd_conv->add_option("--factor", factor, "Step-count growth per level");
    cmd_conv->add_option("--path", args.path_csv, "Base controls (default: initial controls)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_forward->parsed()) {
            return run(args, "forward", [&](const ScenarioConfig& cfg) {
                if (!velocity_out.empty()) {
                    write_field_file(velocity_out, to_field_file(build_velocity(cfg)));
                    std::printf("wrote %s\n", velocity_out.c_str());
                }
                const StateEnsemble ens = build_scenario_ensemble(cfg, resolve_threads(cfg));
                const std::string out =
                    args.output == "out" ? "ensemble.oedf" : args.output;
                write_field_file(out, to_field_file(ens));
                std::printf("wrote %s (M=%d, frames=%d)\n", out.c_str(), ens.M,
                            ens.num_frames());
                return 0;
            });
        }
        if (cmd_unitobs->parsed()) {
            return run(args, "unit-obs", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                const ControlVector controls = get_controls(cfg, args);
                const SensorPath path = rollout(controls, problem.n_t, problem.dt);
                const ObservationOperator op = assemble_G(*ens, problem.kernel, path);
                const std::string out = args.output == "out" ? "unit_obs.csv" : args.output;
                write_observations_csv(out, path, op.G);
                std::printf("wrote %s\n", out.c_str());
                return 0;
            });
        }
        if (cmd_grid->parsed()) {
            return run(args, "gridsearch", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                std::vector<double> thetas(theta_steps), omegas(omega_steps);
                for (int i = 0; i < theta_steps; ++i) {
                    thetas[i] = -M_PI + (2.0 * M_PI * i) / std::max(1, theta_steps - 1);
                }
                for (int i = 0; i < omega_steps; ++i) {
                    omegas[i] = problem.bounds.omega_lo +
                                (problem.bounds.omega_hi - problem.bounds.omega_lo) * i /
                                    std::max(1, omega_steps - 1);
                }
                const double v = v_const > 0.0 ? v_const : cfg.init_v;
                const GridSearchResult res =
                    grid_search(problem, thetas, omegas, v, resolve_threads(cfg));
                const std::string out = args.output == "out" ? "gridsearch.csv" : args.output;
                write_gridsearch_csv(out, res);
                std::printf("wrote %s; %zu local minima\n", out.c_str(),
                            res.local_minima.size());
                for (std::size_t i = 0; i < res.local_minima.size() && i < 8; ++i) {
                    const auto& m = res.local_minima[i];
                    std::printf("  minimum %zu: theta0=%.6g omega0=%.6g utility=%.8g\n", i + 1,
                                m.theta0, m.omega0, m.utility);
                }
                return 0;
            });
        }
        if (cmd_opt->parsed()) {
            return run(args, "optimize", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                const ControlVector init = get_controls(cfg, args);
                const OptimizeResult res = optimize(problem, init, cfg.barrier);
                print_result(res);
                if (res.status == OptimizeStatus::infeasible_start) {
                    std::fprintf(stderr, "%s\n", res.message.c_str());
                    return 3;
                }
                write_result(args.output, res);
                return 0;
            });
        }
        if (cmd_refine->parsed()) {
            return run(args, "refine", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                DesignProblem problem = build_problem(cfg, ens);
                ControlVector controls = get_controls(cfg, args);
                OptimizeResult res = optimize(problem, controls, cfg.barrier);
                print_result(res);
                if (res.status == OptimizeStatus::infeasible_start) {
                    std::fprintf(stderr, "%s\n", res.message.c_str());
                    return 3;
                }
                write_result(args.output + "_stage0", res);
                for (int stage = 1; stage <= stages; ++stage) {
                    const RefinedStart refined = refine_warmstart(problem, res);
                    problem = refined.problem;
                    res = optimize(problem, refined.controls, cfg.barrier, &refined.warm);
                    std::printf("--- stage %d (dt = %.6g) ---\n", stage, problem.dt);
                    print_result(res);
                    write_result(args.output + "_stage" + std::to_string(stage), res);
                    if (res.status == OptimizeStatus::infeasible_start) return 3;
                }
                return 0;
            });
        }
        if (cmd_eval->parsed()) {
            return run(args, "evaluate", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                print_report(evaluate(problem, get_controls(cfg, args)));
                return 0;
            });
        }
        if (cmd_post->parsed()) {
            return run(args, "posterior", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                const ControlVector controls = get_controls(cfg, args);
                const SensorPath path = rollout(controls, problem.n_t, problem.dt);
                const ObservationOperator op = assemble_G(*ens, problem.kernel, path);
                const PosteriorModel post =
                    posterior(fisher_matrix(op.G, problem.noise), problem.prior);

                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> prior_eig(problem.prior.cov);
                const std::string out = args.output == "out" ? "spectrum.csv" : args.output;
                write_spectrum_csv(out, prior_eig.eigenvalues().reverse(), post.eigenvalues);
                std::printf("wrote %s\npsi_a = %.17g\npsi_d = %.17g\n", out.c_str(), post.psi_a,
                            post.psi_d);

                if (!truth.empty()) {
                    if (static_cast<int>(truth.size()) != ens->M) {
                        throw ConfigError("--synthetic-truth needs M = " +
                                          std::to_string(ens->M) + " values");
                    }
                    const Eigen::Map<const Eigen::VectorXd> m_true(truth.data(), ens->M);
                    const Eigen::VectorXd d_obs =
                        op.G * m_true + sample_noise(problem.noise, cfg.seed);
                    const Eigen::VectorXd mean =
                        posterior_mean(op.G, problem.noise, problem.prior, d_obs);
                    std::printf("posterior mean =");
                    for (int i = 0; i < mean.size(); ++i) std::printf(" %.12g", mean[i]);
                    std::printf("\n");
                }
                return 0;
            });
        }
        if (cmd_snr->parsed()) {
            return run(args, "snr", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                const ControlVector controls = get_controls(cfg, args);
                const SensorPath path = rollout(controls, problem.n_t, problem.dt);
                const Eigen::VectorXd db = estimate_snr(*ens, problem.kernel, path,
                                                        problem.noise, problem.prior,
                                                        snr_samples, cfg.seed);
                const std::string out = args.output == "out" ? "snr.csv" : args.output;
                write_snr_csv(out, path.times, db);
                std::printf("wrote %s (range %.2f dB .. %.2f dB)\n", out.c_str(), db.minCoeff(),
                            db.maxCoeff());
                return 0;
            });
        }
        if (cmd_conv->parsed()) {
            return run(args, "convergence", [&](const ScenarioConfig& cfg) {
                auto ens = get_ensemble(cfg, args);
                const DesignProblem problem = build_problem(cfg, ens);
                const ConvergenceTable table =
                    convergence_study(problem, get_controls(cfg, args), levels, factor);
                const std::string out = args.output == "out" ? "convergence.csv" : args.output;
                write_convergence_csv(out, table);
                std::printf("wrote %s\n", out.c_str());
                for (std::size_t i = 0; i < table.error_ratios.size(); ++i) {
                    std::printf("error ratio level %zu/%zu = %.4g\n", i, i + 1,
                                table.error_ratios[i]);
                }
                return 0;
            });
        }
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 2;
    } catch (const EvaluationError& e) {
        std::fprintf(stderr, "evaluation error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
