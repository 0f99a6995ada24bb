#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oedpath/objective.hpp"

using namespace oed;

namespace {

std::shared_ptr<StateEnsemble> shared_ens(StateEnsemble ens) {
    return std::make_shared<StateEnsemble>(std::move(ens));
}

DesignProblem make_problem(std::shared_ptr<const StateEnsemble> ens, MeasurementKernel kernel,
                           int n_t, double gamma) {
    DesignProblem p;
    p.ensemble = std::move(ens);
    p.kernel = kernel;
    p.n_t = n_t;
    p.dt = p.ensemble->final_time() / (n_t - 1);
    p.noise = build_noise_precision(n_t, p.dt);
    p.prior = GaussianPrior::identity(p.ensemble->M);
    p.obstacles = ObstacleSet::for_domain(p.ensemble->grid, 0.02);
    p.start = {0.45, 0.55};
    p.gamma = gamma;
    return p;
}

ControlVector random_feasible_controls(int n_steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(0.06, 0.15);
    std::uniform_real_distribution<double> w(-1.5, 1.5);
    std::uniform_real_distribution<double> th(-M_PI, M_PI);
    ControlVector c;
    c.x0 = {0.45, 0.55};
    c.theta0 = th(rng);
    c.constant_speed = false;
    c.v.resize(n_steps);
    for (auto& x : c.v) x = v(rng);
    c.omega.resize(n_steps);
    for (auto& x : c.omega) x = w(rng);
    return c;
}

StateEnsemble smooth_ensemble(const Grid2D& g, int M, int n_frames, double T,
                              std::uint64_t seed) {
    std::vector<std::vector<std::vector<double>>> frames(M);
    for (int m = 0; m < M; ++m) {
        for (int f = 0; f < n_frames; ++f) {
            frames[m].push_back(test::smooth_random_field(g, seed + 31 * m + f));
        }
    }
    return test::manual_ensemble(g, T, frames);
}

}  // namespace

TEST_CASE("zero ensemble: utility equals the prior utility, gradient is pure regularization") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    auto ens = shared_ens(
        test::steady_ensemble(g, 1.0, {std::vector<double>(g.num_nodes(), 0.0),
                                       std::vector<double>(g.num_nodes(), 0.0)}));
    DesignProblem p = make_problem(ens, MeasurementKernel::pointwise(), 11, 0.0);

    ControlVector c = ControlVector::constant(p.start, 0.3, 0.1, 0.5, 10, true);
    const ObjectiveReport rep = evaluate(p, c);
    CHECK(rep.utility == doctest::Approx(2.0).epsilon(1e-14));  // trace of I_2
    CHECK(rep.total == rep.utility);

    p.gamma = 0.25;
    const ObjectiveGradient grad = gradient(p, c);
    for (const auto& gp : grad.positions) {
        CHECK(gp.x() == 0.0);
        CHECK(gp.y() == 0.0);
    }
    const RegularizationValue reg = regularization(c, p.dt, p.gamma);
    CHECK(grad.report.total == doctest::Approx(2.0 + reg.value).epsilon(1e-14));
    CHECK((grad.controls.v - reg.gradient.v).cwiseAbs().maxCoeff() == 0.0);
    CHECK((grad.controls.omega - reg.gradient.omega).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar closed form for the A-gradient (M = 1)") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    const Vec2 a(0.8, -0.5);
    auto ens = shared_ens(test::steady_ensemble(
        g, 1.0, {test::nodal_field(g, [&](double x, double y) { return a.x() * x + a.y() * y; })}));
    DesignProblem p = make_problem(ens, MeasurementKernel::pointwise(), 8, 0.0);
    p.prior = GaussianPrior::make(Eigen::VectorXd::Constant(1, 0.2),
                                  Eigen::MatrixXd::Constant(1, 1, 0.9));

    const ControlVector c = ControlVector::constant(p.start, 0.7, 0.12, 0.9, 7, true);
    const SensorPath path = rollout(c, p.n_t, p.dt);
    const ObservationOperator op = assemble_G(*p.ensemble, p.kernel, path);
    const ObservationDerivatives dG = assemble_dG(*p.ensemble, p.kernel, path);
    const PosteriorModel post = posterior(fisher_matrix(op.G, p.noise), p.prior);
    const auto grad = utility_position_gradient(p, post, op.G, dG);

    const double s_post = post.post_cov(0, 0);
    const Eigen::VectorXd w = p.noise.apply(op.G.col(0));
    for (int k = 0; k < p.n_t; ++k) {
        // dPsi_A/dp_k = -2 s_post^2 [Sigma^-1 g]_k a_i for the linear state.
        CHECK(grad[k].x() ==
              doctest::Approx(-2.0 * s_post * s_post * w[k] * a.x()).epsilon(1e-12));
        CHECK(grad[k].y() ==
              doctest::Approx(-2.0 * s_post * s_post * w[k] * a.y()).epsilon(1e-12));
    }
}

TEST_CASE("full-chain gradient matches finite differences (A and D)") {
    const Grid2D g = Grid2D::unit_square(65, 65);
    auto ens = shared_ens(smooth_ensemble(g, 2, 6, 1.0, 500));
    const int n_t = 20;

    for (const Criterion crit : {Criterion::A, Criterion::D}) {
        DesignProblem p = make_problem(ens, MeasurementKernel::gaussian(0.05), n_t, 0.1);
        p.criterion = crit;
        for (int trial = 0; trial < 2; ++trial) {
            const ControlVector c = random_feasible_controls(n_t - 1, 900 + trial);
            if (!evaluate(p, c).feasible) continue;
            const ObjectiveGradient grad = gradient(p, c);

            const double h = 1e-6;
            auto fd_total = [&](auto&& mutate) {
                ControlVector hi = c, lo = c;
                mutate(hi, +h);
                mutate(lo, -h);
                return (evaluate(p, hi).total - evaluate(p, lo).total) / (2.0 * h);
            };
            const double gscale = 1.0 + std::abs(grad.controls.theta0);

            const double fd_th = fd_total([](ControlVector& c, double d) { c.theta0 += d; });
            CHECK(grad.controls.theta0 == doctest::Approx(fd_th).epsilon(1e-5).scale(gscale));
            for (std::size_t i = 0; i < c.v.size(); i += 5) {
                const double fd = fd_total([i](ControlVector& c, double d) { c.v[i] += d; });
                CHECK(grad.controls.v[i] ==
                      doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1e-3));
            }
            for (std::size_t i = 0; i < c.omega.size(); i += 5) {
                const double fd = fd_total([i](ControlVector& c, double d) { c.omega[i] += d; });
                CHECK(grad.controls.omega[i] ==
                      doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1e-3));
            }
        }
    }
}

TEST_CASE("row-structured gradient equals the dense trace formula") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    auto ens = shared_ens(smooth_ensemble(g, 2, 4, 1.0, 600));
    const int n_t = 5;
    DesignProblem p = make_problem(ens, MeasurementKernel::gaussian(0.06), n_t, 0.0);

    const ControlVector c = random_feasible_controls(n_t - 1, 42);
    const SensorPath path = rollout(c, p.n_t, p.dt);
    const ObservationOperator op = assemble_G(*p.ensemble, p.kernel, path);
    const ObservationDerivatives dG = assemble_dG(*p.ensemble, p.kernel, path);
    const PosteriorModel post = posterior(fisher_matrix(op.G, p.noise), p.prior);

    // Dense noise precision for the oracle.
    Eigen::MatrixXd Sinv = Eigen::MatrixXd::Zero(n_t, n_t);
    for (int k = 0; k < n_t; ++k) {
        Sinv(k, k) = p.noise.diag[k];
        if (k + 1 < n_t) {
            Sinv(k, k + 1) = p.noise.offdiag[k];
            Sinv(k + 1, k) = p.noise.offdiag[k];
        }
    }

    for (const Criterion crit : {Criterion::A, Criterion::D}) {
        p.criterion = crit;
        const auto fast = utility_position_gradient(p, post, op.G, dG);
        for (int k = 0; k < n_t; ++k) {
            for (int i = 0; i < 2; ++i) {
                Eigen::MatrixXd dG_full = Eigen::MatrixXd::Zero(n_t, 2);
                dG_full.row(k) = (i == 0) ? dG.dx.row(k) : dG.dy.row(k);
                double oracle;
                if (crit == Criterion::A) {
                    oracle = -2.0 * (post.post_cov * op.G.transpose() * Sinv * dG_full *
                                     post.post_cov)
                                        .trace();
                } else {
                    oracle = -2.0 * post.psi_d *
                             (op.G.transpose() * Sinv * dG_full * post.post_cov).trace();
                }
                const double got = (i == 0) ? fast[k].x() : fast[k].y();
                CHECK(got == doctest::Approx(oracle).epsilon(1e-12).scale(std::abs(oracle) + 1e-12));
            }
        }
    }
}

TEST_CASE("D-gradient is Psi_D times the log-determinant gradient") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    auto ens = shared_ens(smooth_ensemble(g, 2, 4, 1.0, 700));
    DesignProblem p = make_problem(ens, MeasurementKernel::gaussian(0.05), 8, 0.0);
    p.criterion = Criterion::D;
    const ControlVector c = random_feasible_controls(7, 11);

    p.minimize_log_det = false;
    const ObjectiveGradient direct = gradient(p, c);
    p.minimize_log_det = true;
    const ObjectiveGradient logd = gradient(p, c);
    const double psi_d = direct.report.psi_d;
    for (int k = 0; k < p.n_t; ++k) {
        CHECK(direct.positions[k].x() ==
              doctest::Approx(psi_d * logd.positions[k].x()).epsilon(1e-12));
        CHECK(direct.positions[k].y() ==
              doctest::Approx(psi_d * logd.positions[k].y()).epsilon(1e-12));
    }
}

TEST_CASE("evaluate is deterministic and reports infeasibility without failing") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    auto ens = shared_ens(smooth_ensemble(g, 2, 4, 1.0, 800));
    DesignProblem p = make_problem(ens, MeasurementKernel::pointwise(), 12, 0.1);

    const ControlVector c = random_feasible_controls(11, 21);
    const ObjectiveReport r1 = evaluate(p, c);
    const ObjectiveReport r2 = evaluate(p, c);
    CHECK(r1.total == r2.total);
    CHECK(r1.utility == r2.utility);
    CHECK((r1.spectrum - r2.spectrum).cwiseAbs().maxCoeff() == 0.0);

    // A path inside the safety margin is infeasible but evaluable.
    ControlVector skim = ControlVector::constant({0.01, 0.5}, 0.0, 0.05, 0.0, 11, true);
    const ObjectiveReport rep = evaluate(p, skim);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.min_margin < 0.0);
    CHECK_FALSE(rep.infeasible_constraints.empty());

    // Leaving the grid entirely is an evaluation error naming the step.
    ControlVector runaway = ControlVector::constant({0.5, 0.5}, 0.0, 0.9, 0.0, 11, true);
    CHECK_THROWS_AS(evaluate(p, runaway), EvaluationError);
}

TEST_CASE("sharper noise cannot make the A-utility worse") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    auto ens = shared_ens(smooth_ensemble(g, 2, 5, 1.0, 900));
    DesignProblem p = make_problem(ens, MeasurementKernel::pointwise(), 15, 0.0);
    const ControlVector c = random_feasible_controls(14, 33);
    const double base = evaluate(p, c).psi_a;
    DesignProblem sharp = p;
    sharp.noise = build_noise_precision(p.n_t, p.dt, 10.0 * p.noise.a_diffusion,
                                        10.0 * p.noise.a_reaction);
    CHECK(evaluate(sharp, c).psi_a < base);
}
