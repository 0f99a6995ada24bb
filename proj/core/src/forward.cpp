#include "oedpath/forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>

#include "oedpath/parallel.hpp"

namespace oed {

int default_thread_count() {
    if (const char* env = std::getenv("OED_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

InitialConditionBasis two_source_basis(Vec2 c1, Vec2 c2, double cap, double width) {
    InitialConditionBasis basis;
    basis.M = 2;
    basis.eval = [c1, c2, cap, width](const Grid2D& g, int m) {
        const Vec2 c = (m == 0) ? c1 : c2;
        std::vector<double> u0(g.num_nodes());
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double r2 = (Vec2(g.x(i), g.y(j)) - c).squaredNorm();
                u0[g.node(i, j)] = std::min(std::exp(-width * r2), cap);
            }
        }
        return u0;
    };
    return basis;
}

InitialConditionBasis field_basis(std::vector<std::vector<double>> fields) {
    InitialConditionBasis basis;
    basis.M = static_cast<int>(fields.size());
    auto shared = std::make_shared<std::vector<std::vector<double>>>(std::move(fields));
    basis.eval = [shared](const Grid2D& g, int m) {
        const auto& f = (*shared)[m];
        if (f.size() != static_cast<std::size_t>(g.num_nodes())) {
            throw ConfigError("field_basis: component " + std::to_string(m) +
                              " has wrong node count");
        }
        return f;
    };
    return basis;
}

StateEnsemble::TimeBracket StateEnsemble::bracket(double t) const {
    const double T = final_time();
    if (t < 0.0 || t > T) {
        throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
    }
    TimeBracket b;
    // Frames are uniform in practice but only strict monotonicity is assumed.
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    int hi = static_cast<int>(it - times.begin());
    if (hi == 0) hi = 1;
    if (hi == num_frames()) hi = num_frames() - 1;
    b.lo = hi - 1;
    b.hi = hi;
    b.w = (t - times[b.lo]) / (times[b.hi] - times[b.lo]);
    return b;
}

void StateEnsemble::validate() const {
    grid.validate();
    if (M < 1) throw ConfigError("StateEnsemble: M must be >= 1");
    if (times.size() < 2) throw ConfigError("StateEnsemble: need at least two frames");
    if (times.front() != 0.0) throw ConfigError("StateEnsemble: first frame time must be 0");
    for (std::size_t f = 1; f < times.size(); ++f) {
        if (!(times[f] > times[f - 1])) {
            throw ConfigError("StateEnsemble: frame times must be strictly increasing");
        }
    }
    const std::size_t expect = static_cast<std::size_t>(M) * times.size() *
                               static_cast<std::size_t>(grid.num_nodes());
    if (data.size() != expect) throw ConfigError("StateEnsemble: data size mismatch");
    for (double v : data) {
        if (!std::isfinite(v)) throw NumericalError("StateEnsemble: non-finite frame value");
    }
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Centered second-order advection-diffusion operator with homogeneous
// Neumann boundaries through ghost-node reflection: the mirror node replaces
// the outside neighbor in the diffusion stencil and cancels the boundary
// advection derivative in the normal direction.
SpMat spatial_operator(const VelocityField& vel, double kappa) {
    const Grid2D& g = vel.grid;
    const int N = g.num_nodes();
    const double ax = kappa / (g.dx * g.dx);
    const double ay = kappa / (g.dy * g.dy);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * 5);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int n = g.node(i, j);
            const double cx = vel.vx[n] / (2.0 * g.dx);
            const double cy = vel.vy[n] / (2.0 * g.dy);
            double diag = -2.0 * (ax + ay);

            if (i > 0 && i < g.nx - 1) {
                trip.emplace_back(n, g.node(i - 1, j), ax + cx);
                trip.emplace_back(n, g.node(i + 1, j), ax - cx);
            } else {
                trip.emplace_back(n, g.node(i == 0 ? 1 : g.nx - 2, j), 2.0 * ax);
            }
            if (j > 0 && j < g.ny - 1) {
                trip.emplace_back(n, g.node(i, j - 1), ay + cy);
                trip.emplace_back(n, g.node(i, j + 1), ay - cy);
            } else {
                trip.emplace_back(n, g.node(i, j == 0 ? 1 : g.ny - 2), 2.0 * ay);
            }
            trip.emplace_back(n, n, diag);
        }
    }
    SpMat L(N, N);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

struct CNStepper {
    SpMat B;  // I + ds/2 L
    Eigen::SparseLU<SpMat> lu;  // factors I - ds/2 L
    int n_steps = 0;
    int store_stride = 1;
    double T = 0.0;

    CNStepper(const VelocityField& vel, const ForwardOptions& opt) {
        if (!(opt.kappa > 0.0)) throw ConfigError("solve_forward: kappa must be > 0");
        if (!(opt.ds > 0.0)) throw ConfigError("solve_forward: ds must be > 0");
        if (!(opt.T > 0.0)) throw ConfigError("solve_forward: T must be > 0");
        const double steps = opt.T / opt.ds;
        n_steps = static_cast<int>(std::lround(steps));
        if (n_steps < 1 || std::abs(steps - n_steps) > 1e-9 * steps) {
            throw ConfigError("solve_forward: T/ds must round to an integer");
        }
        store_stride = std::max(1, opt.store_stride);
        if (n_steps % store_stride != 0) {
            throw ConfigError("solve_forward: store_stride must divide T/ds");
        }
        T = opt.T;
        vel.validate();

        if (opt.warn_peclet) {
            const double pe = cell_peclet(vel, opt.kappa);
            if (pe > 2.0) {
                std::cerr << "warning: cell Peclet number " << pe
                          << " > 2; the centered scheme may oscillate\n";
            }
        }

        const SpMat L = spatial_operator(vel, opt.kappa);
        SpMat identity(L.rows(), L.rows());
        identity.setIdentity();
        const SpMat A = identity - (opt.ds / 2.0) * L;
        B = identity + (opt.ds / 2.0) * L;
        lu.compute(A);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("solve_forward: Crank-Nicolson factorization failed");
        }
    }

    int num_stored() const { return n_steps / store_stride + 1; }

    std::vector<double> stored_times() const {
        std::vector<double> t(num_stored());
        for (int f = 0; f < num_stored(); ++f) {
            t[f] = T * (static_cast<double>(f) * store_stride) / n_steps;
        }
        return t;
    }

    // Runs the time loop and hands each stored frame to sink(frame_idx, u).
    void run(const std::vector<double>& u0,
             const std::function<void(int, const Eigen::VectorXd&)>& sink) const {
        Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.data(), u0.size());
        sink(0, u);
        for (int k = 1; k <= n_steps; ++k) {
            u = lu.solve(B * u);
            if (k % store_stride == 0) sink(k / store_stride, u);
        }
    }
};

}  // namespace

StateHistory solve_forward(const VelocityField& vel, const std::vector<double>& u0,
                           const ForwardOptions& opt) {
    if (u0.size() != static_cast<std::size_t>(vel.grid.num_nodes())) {
        throw ConfigError("solve_forward: u0 has wrong node count");
    }
    CNStepper stepper(vel, opt);
    StateHistory hist;
    hist.grid = vel.grid;
    hist.times = stepper.stored_times();
    hist.frames.assign(stepper.num_stored(), {});
    stepper.run(u0, [&](int f, const Eigen::VectorXd& u) {
        hist.frames[f].assign(u.data(), u.data() + u.size());
    });
    return hist;
}

StateEnsemble build_ensemble(const VelocityField& vel, const InitialConditionBasis& basis,
                             const ForwardOptions& opt, int threads) {
    basis.validate();
    CNStepper stepper(vel, opt);
    StateEnsemble ens;
    ens.grid = vel.grid;
    ens.M = basis.M;
    ens.times = stepper.stored_times();
    const std::size_t nodes = static_cast<std::size_t>(vel.grid.num_nodes());
    ens.data.assign(static_cast<std::size_t>(basis.M) * ens.times.size() * nodes, 0.0);

    if (threads <= 1) {
        // One factorization shared across all components.
        for (int m = 0; m < basis.M; ++m) {
            stepper.run(basis.eval(vel.grid, m), [&](int f, const Eigen::VectorXd& u) {
                std::copy(u.data(), u.data() + u.size(), ens.frame(m, f));
            });
        }
    } else {
        ForwardOptions worker_opt = opt;
        worker_opt.warn_peclet = false;
        parallel_for(basis.M, threads, [&](int m) {
            CNStepper local(vel, worker_opt);
            local.run(basis.eval(vel.grid, m), [&](int f, const Eigen::VectorXd& u) {
                std::copy(u.data(), u.data() + u.size(), ens.frame(m, f));
            });
        });
    }
    return ens;
}

std::vector<double> eval_state(const StateEnsemble& ens, int m, double t) {
    if (m < 0 || m >= ens.M) throw ConfigError("eval_state: component index out of range");
    const auto b = ens.bracket(t);
    const double* lo = ens.frame(m, b.lo);
    const double* hi = ens.frame(m, b.hi);
    std::vector<double> out(ens.grid.num_nodes());
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = (1.0 - b.w) * lo[n] + b.w * hi[n];
    }
    return out;
}

}  // namespace oed
