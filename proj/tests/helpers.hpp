// Shared fixtures for the unit tests.
#pragma once

#include <random>
#include <vector>

#include "oedpath/forward.hpp"
#include "oedpath/objective.hpp"

namespace oed::test {

/// Hand-built ensemble with explicit frames; no PDE solve involved.
inline StateEnsemble manual_ensemble(const Grid2D& grid, double T,
                                     const std::vector<std::vector<std::vector<double>>>& frames) {
    // frames[m][f] are nodal fields, all components sharing uniform times.
    StateEnsemble ens;
    ens.grid = grid;
    ens.M = static_cast<int>(frames.size());
    const int n_f = static_cast<int>(frames[0].size());
    ens.times.resize(n_f);
    for (int f = 0; f < n_f; ++f) ens.times[f] = T * f / (n_f - 1);
    ens.data.resize(static_cast<std::size_t>(ens.M) * n_f * grid.num_nodes());
    for (int m = 0; m < ens.M; ++m) {
        for (int f = 0; f < n_f; ++f) {
            std::copy(frames[m][f].begin(), frames[m][f].end(), ens.frame(m, f));
        }
    }
    ens.validate();
    return ens;
}

/// Time-constant ensemble from nodal fields (two frames, 0 and T).
inline StateEnsemble steady_ensemble(const Grid2D& grid, double T,
                                     const std::vector<std::vector<double>>& fields) {
    std::vector<std::vector<std::vector<double>>> frames;
    for (const auto& f : fields) frames.push_back({f, f});
    return manual_ensemble(grid, T, frames);
}

inline std::vector<double> nodal_field(const Grid2D& grid,
                                       const std::function<double(double, double)>& fn) {
    std::vector<double> out(grid.num_nodes());
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) out[grid.node(i, j)] = fn(grid.x(i), grid.y(j));
    }
    return out;
}

/// Smooth random field: a low-order trigonometric mix with seeded
/// coefficients, safe to differentiate in tests.
inline std::vector<double> smooth_random_field(const Grid2D& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng), a3 = coef(rng), a4 = coef(rng);
    return nodal_field(grid, [=](double x, double y) {
        return a0 + a1 * std::sin(2.0 * M_PI * x) + a2 * std::cos(M_PI * y) +
               a3 * x * y + a4 * std::sin(M_PI * x) * std::sin(M_PI * y);
    });
}

}  // namespace oed::test
