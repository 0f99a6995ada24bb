#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "oedpath/optimizer.hpp"

using namespace oed;

namespace {

std::shared_ptr<StateEnsemble> zero_ensemble(const Grid2D& g, int M) {
    std::vector<std::vector<double>> fields(M, std::vector<double>(g.num_nodes(), 0.0));
    return std::make_shared<StateEnsemble>(test::steady_ensemble(g, 1.0, fields));
}

std::shared_ptr<StateEnsemble> smooth_ensemble(const Grid2D& g, int M, std::uint64_t seed) {
    std::vector<std::vector<std::vector<double>>> frames(M);
    for (int m = 0; m < M; ++m) {
        for (int f = 0; f < 5; ++f) {
            frames[m].push_back(test::smooth_random_field(g, seed + 13 * m + f));
        }
    }
    return std::make_shared<StateEnsemble>(test::manual_ensemble(g, 1.0, frames));
}

DesignProblem make_problem(std::shared_ptr<const StateEnsemble> ens, int n_t, double gamma) {
    DesignProblem p;
    p.ensemble = std::move(ens);
    p.kernel = MeasurementKernel::pointwise();
    p.n_t = n_t;
    p.dt = p.ensemble->final_time() / (n_t - 1);
    p.noise = build_noise_precision(n_t, p.dt);
    p.prior = GaussianPrior::identity(p.ensemble->M);
    p.obstacles = ObstacleSet::for_domain(p.ensemble->grid, 0.02);
    p.start = {0.5, 0.5};
    p.gamma = gamma;
    return p;
}

}  // namespace

TEST_CASE("zero information drives the speed to its lower bound") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    DesignProblem p = make_problem(zero_ensemble(g, 2), 16, 0.5);

    ControlVector init = ControlVector::constant(p.start, 0.4, 0.15, 0.8, p.n_t - 1, true);
    BarrierSettings settings;
    settings.max_outer = 40;
    const OptimizeResult res = optimize(p, init, settings);

    CHECK((res.status == OptimizeStatus::optimal || res.status == OptimizeStatus::acceptable));
    CHECK(res.controls.v[0] == doctest::Approx(p.bounds.v_lo).epsilon(1e-6));
    CHECK(res.controls.omega[5] == doctest::Approx(0.0).scale(1.0));
    CHECK(res.final_report.utility == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("an already-stationary start terminates immediately") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    DesignProblem p = make_problem(zero_ensemble(g, 2), 16, 0.5);

    ControlVector init = ControlVector::constant(p.start, 0.0, p.bounds.v_lo, 0.0, p.n_t - 1, true);
    BarrierSettings settings;
    settings.mu0 = 1e-10;  // warm-started barrier weight: a fixed-point check
    const OptimizeResult res = optimize(p, init, settings);

    CHECK(res.status == OptimizeStatus::optimal);
    CHECK(res.iterations <= 2);
    CHECK(res.controls.v[0] == doctest::Approx(p.bounds.v_lo).epsilon(1e-9));
    for (double w : res.controls.omega) CHECK(std::abs(w) < 1e-9);
}

TEST_CASE("infeasible starts are rejected with a usable diagnostic") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    DesignProblem p = make_problem(zero_ensemble(g, 2), 16, 0.1);
    p.obstacles.ellipsoids.push_back(
        EllipsoidObstacle::from_axes(p.start, 0.2, 0.2));  // start sits inside

    ControlVector init = ControlVector::constant(p.start, 0.0, 0.1, 0.0, p.n_t - 1, true);
    const OptimizeResult res = optimize(p, init, BarrierSettings{});
    CHECK(res.status == OptimizeStatus::infeasible_start);
    CHECK(res.message.find("grid-search") != std::string::npos);
}

TEST_CASE("optimization on a smooth instance: feasible iterates, monotone rounds, determinism") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    DesignProblem p = make_problem(smooth_ensemble(g, 2, 40), 25, 0.1);

    ControlVector init = ControlVector::constant(p.start, 0.8, 0.1, 0.4, p.n_t - 1, true);
    BarrierSettings settings;
    settings.max_outer = 12;
    settings.mu_min = 1e-8;
    settings.max_inner = 60;

    const OptimizeResult a = optimize(p, init, settings);
    const OptimizeResult b = optimize(p, init, settings);

    // Every accepted iterate stayed strictly feasible.
    CHECK(a.min_margin_seen > 0.0);
    for (const auto& row : a.history) CHECK(row.min_margin > 0.0);
    CHECK(a.constraint_violation == 0.0);

    // The barrier-free total at the end of each outer round never increases.
    double prev_end = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        if (a.history[i].mu != a.history[i - 1].mu) {  // round boundary
            CHECK(a.history[i - 1].total <= prev_end + 1e-10);
            prev_end = a.history[i - 1].total;
        }
    }

    // Deterministic: bitwise-identical histories.
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].total == b.history[i].total);
        CHECK(a.history[i].stationarity == b.history[i].stationarity);
    }

    // It made progress over the start.
    CHECK(a.final_report.total < evaluate(p, init).total);
}

TEST_CASE("grid search masks, plateaus, and local minima") {
    const Grid2D g = Grid2D::unit_square(17, 17);

    std::vector<double> thetas, omegas;
    for (int i = 0; i < 8; ++i) thetas.push_back(-M_PI + i * (2.0 * M_PI / 8));
    for (int i = 0; i < 8; ++i) omegas.push_back(-2.0 + i * (4.0 / 7));

    // Zero ensemble: a flat utility landscape has no strict minima.
    DesignProblem flat = make_problem(zero_ensemble(g, 2), 16, 0.1);
    const GridSearchResult res = grid_search(flat, thetas, omegas, 0.1);
    CHECK(res.local_minima.empty());
    double util = -1.0;
    for (int it = 0; it < 8; ++it) {
        for (int iw = 0; iw < 8; ++iw) {
            if (!res.feasible(it, iw)) continue;
            if (util < 0.0) util = res.psi_a(it, iw);
            CHECK(res.psi_a(it, iw) == doctest::Approx(util).epsilon(1e-14));
        }
    }

    // An obstacle swallowing the start point masks every cell.
    DesignProblem blocked = make_problem(zero_ensemble(g, 2), 16, 0.1);
    blocked.obstacles.ellipsoids.push_back(
        EllipsoidObstacle::from_axes(blocked.start, 0.3, 0.3));
    const GridSearchResult none = grid_search(blocked, thetas, omegas, 0.1);
    CHECK_FALSE(none.feasible.array().any());
    CHECK(none.local_minima.empty());

    // A varying landscape yields minima sorted by utility.
    DesignProblem varied = make_problem(smooth_ensemble(g, 2, 90), 16, 0.1);
    const GridSearchResult vres = grid_search(varied, thetas, omegas, 0.1, 2);
    CHECK(vres.feasible.array().any());
    for (std::size_t i = 1; i < vres.local_minima.size(); ++i) {
        CHECK(vres.local_minima[i - 1].utility <= vres.local_minima[i].utility);
    }

    CHECK_THROWS_AS(grid_search(flat, {}, omegas, 0.1), ConfigError);
    CHECK_THROWS_AS(grid_search(flat, thetas, omegas, 99.0), ConfigError);
}

TEST_CASE("refinement doubles the grid and maps the warm-start data") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    DesignProblem p = make_problem(zero_ensemble(g, 2), 11, 0.1);

    OptimizeResult coarse;
    coarse.status = OptimizeStatus::optimal;
    coarse.controls = ControlVector::constant(p.start, 0.4, 0.08, 0.3, 10, true);
    coarse.warm_out.mu = 3e-7;
    // One synthetic curvature pair in the packed space [theta0, v, omega...].
    Eigen::VectorXd s(12), y(12);
    for (int i = 0; i < 12; ++i) {
        s[i] = 0.01 * (i + 1);
        y[i] = 0.1 / (i + 1);
    }
    coarse.warm_out.s = {s};
    coarse.warm_out.y = {y};

    const RefinedStart refined = refine_warmstart(p, coarse);
    CHECK(refined.problem.n_t == 21);
    CHECK(refined.problem.dt == doctest::Approx(p.dt / 2.0).epsilon(1e-15));
    CHECK(refined.problem.noise.n_t == 21);
    CHECK(refined.controls.omega.size() == 20);
    for (double w : refined.controls.omega) CHECK(w == 0.3);
    CHECK(refined.controls.v.size() == 1);
    CHECK(refined.controls.v[0] == 0.08);
    CHECK(refined.warm.mu == 3e-7);

    // The rollout endpoints stay pinned to t = 0 and t = T.
    const SensorPath path = rollout(refined.controls, refined.problem.n_t, refined.problem.dt);
    CHECK(path.times.front() == 0.0);
    CHECK(path.times.back() == doctest::Approx((p.n_t - 1) * p.dt).epsilon(1e-15));

    // s·y is preserved by the refinement mapping.
    REQUIRE(refined.warm.s.size() == 1);
    CHECK(refined.warm.s[0].dot(refined.warm.y[0]) == doctest::Approx(s.dot(y)).epsilon(1e-14));

    OptimizeResult bad;
    bad.status = OptimizeStatus::max_iter;
    CHECK_THROWS_AS(refine_warmstart(p, bad), ConfigError);
}

TEST_CASE("convergence study on a zero ensemble is exactly flat") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    DesignProblem p = make_problem(zero_ensemble(g, 2), 11, 0.1);
    const ControlVector c = ControlVector::constant(p.start, 0.2, 0.1, 0.5, 10, true);
    const ConvergenceTable table = convergence_study(p, c, 3);
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        CHECK(row.psi_a == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(row.error < 1e-13);
    }
    CHECK_THROWS_AS(convergence_study(p, c, 2), ConfigError);
}
