// Advection-diffusion forward model on a uniform grid and the precomputed
// unit-state ensemble with continuous-in-time evaluation.
#pragma once

#include <functional>
#include <vector>

#include "oedpath/grid.hpp"
#include "oedpath/velocity.hpp"

namespace oed {

/// Initial conditions u0(·; e_m) for each parameter unit vector e_m,
/// evaluated as nodal fields.
struct InitialConditionBasis {
    int M = 0;
    std::function<std::vector<double>(const Grid2D&, int m)> eval;

    void validate() const {
        if (M < 1) throw ConfigError("InitialConditionBasis: M must be >= 1");
        if (!eval) throw ConfigError("InitialConditionBasis: missing evaluator");
    }
};

/// The paper-style two-source release: component m is
/// min(exp(-width * |x - c_m|^2), cap).
InitialConditionBasis two_source_basis(Vec2 c1, Vec2 c2, double cap = 0.5, double width = 100.0);

/// Basis backed by explicit nodal fields (one per component).
InitialConditionBasis field_basis(std::vector<std::vector<double>> fields);

struct ForwardOptions {
    double kappa = 1e-3;   // diffusivity, > 0
    double T = 5.0;        // final time
    double ds = 5e-3;      // time step; T/ds must round to an integer
    int store_stride = 1;  // keep every k-th frame (plus t=0 and t=T)
    bool warn_peclet = true;
};

/// Frames of one forward solve; times strictly increasing, first 0, last T.
struct StateHistory {
    Grid2D grid;
    std::vector<double> times;
    std::vector<std::vector<double>> frames;  // one nodal field per time
};

/// M unit solutions on a shared space-time grid. frame(m, f) is the nodal
/// field of component m at times[f]; storage is contiguous per frame.
struct StateEnsemble {
    Grid2D grid;
    int M = 0;
    std::vector<double> times;
    std::vector<double> data;  // [(m * n_frames + f) * num_nodes + node]

    int num_frames() const { return static_cast<int>(times.size()); }
    double final_time() const { return times.empty() ? 0.0 : times.back(); }

    const double* frame(int m, int f) const {
        return data.data() + (static_cast<std::size_t>(m) * num_frames() + f) *
                                 static_cast<std::size_t>(grid.num_nodes());
    }
    double* frame(int m, int f) {
        return data.data() + (static_cast<std::size_t>(m) * num_frames() + f) *
                                 static_cast<std::size_t>(grid.num_nodes());
    }

    /// Bracketing frames and interpolation weight for time t in [0, T].
    /// Exact at frame times. Throws DomainError outside [0, T].
    struct TimeBracket {
        int lo = 0;
        int hi = 0;
        double w = 0.0;  // value = (1-w)·frame(lo) + w·frame(hi)
    };
    TimeBracket bracket(double t) const;

    void validate() const;
};

/// Crank-Nicolson time stepping with centered second-order differences and
/// homogeneous Neumann boundaries via ghost-node reflection. Returns all
/// stored frames including t = 0.
StateHistory solve_forward(const VelocityField& vel, const std::vector<double>& u0,
                           const ForwardOptions& opt);

/// Forward-solve each basis component; deterministic regardless of the
/// parallel schedule.
StateEnsemble build_ensemble(const VelocityField& vel, const InitialConditionBasis& basis,
                             const ForwardOptions& opt, int threads = 1);

/// Linear interpolation between the bracketing frames of component m.
std::vector<double> eval_state(const StateEnsemble& ens, int m, double t);

}  // namespace oed
