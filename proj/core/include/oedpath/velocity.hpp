// Nodal velocity fields for the advection term.
#pragma once

#include <string>
#include <vector>

#include "oedpath/grid.hpp"

namespace oed {

struct VelocityField {
    Grid2D grid;
    std::vector<double> vx;  // nx·ny nodal values
    std::vector<double> vy;

    double max_speed() const;
    void validate() const;  // sizes match, all entries finite
};

enum class BuiltinVelocity { zero, double_gyre };

BuiltinVelocity parse_builtin_velocity(const std::string& name);

/// Analytic divergence-free field sampled at grid nodes. double_gyre derives
/// from a stream function with a clockwise outer circulation, two strong
/// cells on the main diagonal and two weak counter-rotating corner cells.
VelocityField builtin_velocity(const Grid2D& grid, BuiltinVelocity kind, double strength);

/// Cell Péclet number max|v|·max(dx,dy)/kappa of the centered scheme.
double cell_peclet(const VelocityField& vel, double kappa);

}  // namespace oed
