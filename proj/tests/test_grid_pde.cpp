#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oedpath/forward.hpp"
#include "oedpath/velocity.hpp"

using namespace oed;

TEST_CASE("grid validation and interpolation basics") {
    CHECK_THROWS_AS(Grid2D::unit_square(2, 5), ConfigError);
    const Grid2D g = Grid2D::unit_square(9, 9);
    CHECK(g.num_nodes() == 81);
    CHECK(g.xmax() == doctest::Approx(1.0));

    // Bilinear interpolation reproduces linear fields exactly.
    const auto f = test::nodal_field(g, [](double x, double y) { return 3.0 * x - 2.0 * y; });
    CHECK(interp(g, f, Vec2(0.37, 0.61)) == doctest::Approx(3.0 * 0.37 - 2.0 * 0.61).epsilon(1e-14));
    const auto grad = interp_gradient(g, f.data(), locate(g, Vec2(0.37, 0.61)));
    CHECK(grad.x() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(grad.y() == doctest::Approx(-2.0).epsilon(1e-12));

    CHECK_THROWS_AS(locate(g, Vec2(1.2, 0.5)), DomainError);
}

TEST_CASE("builtin velocity: zero field and linear scaling") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    const VelocityField zero = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
    for (double v : zero.vx) CHECK(v == 0.0);
    for (double v : zero.vy) CHECK(v == 0.0);

    const VelocityField a = builtin_velocity(g, BuiltinVelocity::double_gyre, 0.7);
    const VelocityField b = builtin_velocity(g, BuiltinVelocity::double_gyre, 1.4);
    for (int n = 0; n < g.num_nodes(); ++n) {
        CHECK(b.vx[n] == doctest::Approx(2.0 * a.vx[n]).epsilon(1e-14));
        CHECK(b.vy[n] == doctest::Approx(2.0 * a.vy[n]).epsilon(1e-14));
    }

    CHECK_THROWS_AS(parse_builtin_velocity("vortex"), ConfigError);
}

TEST_CASE("double gyre has small discrete divergence on the 65x65 grid") {
    const Grid2D g = Grid2D::unit_square(65, 65);
    const VelocityField v = builtin_velocity(g, BuiltinVelocity::double_gyre, 1.0);
    double max_div = 0.0;
    for (int j = 1; j < g.ny - 1; ++j) {
        for (int i = 1; i < g.nx - 1; ++i) {
            const double div =
                (v.vx[g.node(i + 1, j)] - v.vx[g.node(i - 1, j)]) / (2.0 * g.dx) +
                (v.vy[g.node(i, j + 1)] - v.vy[g.node(i, j - 1)]) / (2.0 * g.dy);
            max_div = std::max(max_div, std::abs(div));
        }
    }
    CHECK(max_div < 10.0 * (g.dx * g.dx + g.dy * g.dy));
}

TEST_CASE("double gyre circulation sense matches the driven scenario") {
    const Grid2D g = Grid2D::unit_square(65, 65);
    const VelocityField v = builtin_velocity(g, BuiltinVelocity::double_gyre, 1.0);
    // Up along the left wall at mid height, down along the right wall,
    // rightward along the top: a clockwise outer circulation.
    CHECK(v.vy[g.node(1, 32)] > 0.0);
    CHECK(v.vy[g.node(63, 32)] < 0.0);
    CHECK(v.vx[g.node(32, 63)] > 0.0);
    CHECK(v.vx[g.node(32, 1)] < 0.0);
}

TEST_CASE("forward solve: zero and constant initial data") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
    ForwardOptions opt;
    opt.kappa = 1e-3;
    opt.T = 0.5;
    opt.ds = 0.05;
    opt.warn_peclet = false;

    const auto zero_hist = solve_forward(vel, std::vector<double>(g.num_nodes(), 0.0), opt);
    for (const auto& frame : zero_hist.frames) {
        for (double u : frame) CHECK(u == 0.0);
    }

    const auto const_hist = solve_forward(vel, std::vector<double>(g.num_nodes(), 3.25), opt);
    for (const auto& frame : const_hist.frames) {
        for (double u : frame) CHECK(u == doctest::Approx(3.25).epsilon(1e-13));
    }
}

TEST_CASE("forward solve conserves mass for zero velocity") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
    const auto u0 = test::nodal_field(g, [](double x, double y) {
        return std::exp(-200.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
    });
    ForwardOptions opt;
    opt.kappa = 1e-3;
    opt.T = 1.0;
    opt.ds = 0.01;
    opt.warn_peclet = false;
    const auto hist = solve_forward(vel, u0, opt);

    auto mass = [&](const std::vector<double>& u) {
        double s = 0.0;
        for (double x : u) s += x;
        return s * g.cell_area();
    };
    const double m0 = mass(hist.frames.front());
    for (const auto& frame : hist.frames) {
        CHECK(mass(frame) == doctest::Approx(m0).epsilon(1e-10));
    }
}

TEST_CASE("forward solve is linear in the initial data") {
    const Grid2D g = Grid2D::unit_square(17, 17);
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::double_gyre, 0.3);
    ForwardOptions opt;
    opt.kappa = 1e-3;
    opt.T = 0.2;
    opt.ds = 0.02;
    opt.warn_peclet = false;

    const auto u0 = test::smooth_random_field(g, 11);
    const auto w0 = test::smooth_random_field(g, 12);
    std::vector<double> mix(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) mix[n] = 2.0 * u0[n] - 0.5 * w0[n];

    const auto hu = solve_forward(vel, u0, opt);
    const auto hw = solve_forward(vel, w0, opt);
    const auto hm = solve_forward(vel, mix, opt);
    double scale = 0.0;
    for (double x : hm.frames.back()) scale = std::max(scale, std::abs(x));
    for (std::size_t f = 0; f < hm.frames.size(); ++f) {
        for (int n = 0; n < g.num_nodes(); ++n) {
            const double expect = 2.0 * hu.frames[f][n] - 0.5 * hw.frames[f][n];
            CHECK(hm.frames[f][n] == doctest::Approx(expect).epsilon(1e-12).scale(scale));
        }
    }
}

TEST_CASE("ensemble linearity and the two-source cap") {
    const Grid2D g = Grid2D::unit_square(33, 33);
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
    ForwardOptions opt;
    opt.kappa = 1e-3;
    opt.T = 0.2;
    opt.ds = 0.02;
    opt.warn_peclet = false;

    const auto basis = two_source_basis({0.1, 0.9}, {0.7, 0.1});
    const auto ens = build_ensemble(vel, basis, opt);

    // Paper-scenario initial condition peaks at exactly the cap value.
    double max0 = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) max0 = std::max(max0, ens.frame(0, 0)[n]);
    CHECK(max0 == 0.5);

    // Linearity: the (e_1 + e_2)-ensemble equals the frame sum.
    InitialConditionBasis sum_basis;
    sum_basis.M = 1;
    sum_basis.eval = [&](const Grid2D& grid, int) {
        auto a = basis.eval(grid, 0);
        const auto b = basis.eval(grid, 1);
        for (std::size_t n = 0; n < a.size(); ++n) a[n] += b[n];
        return a;
    };
    const auto ens_sum = build_ensemble(vel, sum_basis, opt);
    for (int f = 0; f < ens.num_frames(); ++f) {
        for (int n = 0; n < g.num_nodes(); ++n) {
            const double expect = ens.frame(0, f)[n] + ens.frame(1, f)[n];
            CHECK(ens_sum.frame(0, f)[n] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
    }

    // M=1 all-zero ensemble.
    InitialConditionBasis zero_basis;
    zero_basis.M = 1;
    zero_basis.eval = [](const Grid2D& grid, int) {
        return std::vector<double>(grid.num_nodes(), 0.0);
    };
    const auto ens_zero = build_ensemble(vel, zero_basis, opt);
    for (double v : ens_zero.data) CHECK(v == 0.0);
}

TEST_CASE("eval_state interpolates linearly between frames") {
    const Grid2D g = Grid2D::unit_square(5, 5);
    std::vector<std::vector<double>> frames;
    for (int f = 0; f < 5; ++f) {
        frames.push_back(test::smooth_random_field(g, 100 + f));
    }
    const auto ens = test::manual_ensemble(g, 2.0, {frames});

    // Exact at frame times.
    for (int f = 0; f < 5; ++f) {
        const auto u = eval_state(ens, 0, ens.times[f]);
        for (int n = 0; n < g.num_nodes(); ++n) CHECK(u[n] == frames[f][n]);
    }
    // Midpoint is the arithmetic mean.
    const auto mid = eval_state(ens, 0, 0.25);
    for (int n = 0; n < g.num_nodes(); ++n) {
        CHECK(mid[n] == doctest::Approx(0.5 * (frames[0][n] + frames[1][n])).epsilon(1e-15));
    }
    // Random time matches independently recomputed weights.
    const double t = 1.2345;
    const int lo = static_cast<int>(t / 0.5);
    const double w = (t - ens.times[lo]) / 0.5;
    const auto u = eval_state(ens, 0, t);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const double expect = (1.0 - w) * frames[lo][n] + w * frames[lo + 1][n];
        CHECK(u[n] == doctest::Approx(expect).epsilon(1e-14));
    }

    CHECK_THROWS_AS(eval_state(ens, 0, -0.1), DomainError);
    CHECK_THROWS_AS(eval_state(ens, 0, 2.1), DomainError);
}

TEST_CASE("forward solve converges at second order on a smooth solution") {
    // u(x, y, t) = exp(-2 kappa pi^2 t) cos(pi x) cos(pi y) solves the
    // heat equation with homogeneous Neumann boundaries.
    const double kappa = 1e-2;
    const double T = 0.5;
    auto solve_error = [&](int n, double ds) {
        const Grid2D g = Grid2D::unit_square(n, n);
        const VelocityField vel = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
        const auto u0 =
            test::nodal_field(g, [](double x, double y) { return std::cos(M_PI * x) * std::cos(M_PI * y); });
        ForwardOptions opt;
        opt.kappa = kappa;
        opt.T = T;
        opt.ds = ds;
        opt.warn_peclet = false;
        const auto hist = solve_forward(vel, u0, opt);
        const double decay = std::exp(-2.0 * kappa * M_PI * M_PI * T);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double exact = decay * std::cos(M_PI * g.x(i)) * std::cos(M_PI * g.y(j));
                err = std::max(err, std::abs(hist.frames.back()[g.node(i, j)] - exact));
            }
        }
        return err;
    };

    const double e0 = solve_error(17, 1.0 / 40.0);
    const double e1 = solve_error(33, 1.0 / 80.0);
    const double e2 = solve_error(65, 1.0 / 160.0);
    const double order01 = std::log2(e0 / e1);
    const double order12 = std::log2(e1 / e2);
    CHECK(order01 >= 1.7);
    CHECK(order12 >= 1.7);
}

TEST_CASE("forward solve rejects bad configuration") {
    const Grid2D g = Grid2D::unit_square(9, 9);
    const VelocityField vel = builtin_velocity(g, BuiltinVelocity::zero, 1.0);
    const std::vector<double> u0(g.num_nodes(), 0.0);
    ForwardOptions opt;
    opt.T = 1.0;
    opt.ds = 0.3;  // T/ds = 3.33...
    opt.warn_peclet = false;
    CHECK_THROWS_AS(solve_forward(vel, u0, opt), ConfigError);
    opt.ds = 0.1;
    opt.kappa = 0.0;
    CHECK_THROWS_AS(solve_forward(vel, u0, opt), ConfigError);
}

TEST_CASE("cell Peclet number reports the advective regime") {
    const Grid2D g = Grid2D::unit_square(65, 65);
    const VelocityField v = builtin_velocity(g, BuiltinVelocity::double_gyre, 1.0);
    CHECK(cell_peclet(v, 1e-3) > 2.0);   // paper regime triggers the warning
    CHECK(cell_peclet(v, 10.0) < 2.0);
}
