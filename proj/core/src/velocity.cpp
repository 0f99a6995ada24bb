#include "oedpath/velocity.hpp"

#include <algorithm>
#include <cmath>

namespace oed {

double VelocityField::max_speed() const {
    double m = 0.0;
    for (std::size_t n = 0; n < vx.size(); ++n) {
        m = std::max(m, std::hypot(vx[n], vy[n]));
    }
    return m;
}

void VelocityField::validate() const {
    grid.validate();
    const std::size_t n = static_cast<std::size_t>(grid.num_nodes());
    if (vx.size() != n || vy.size() != n) {
        throw ConfigError("VelocityField: component arrays must have nx*ny entries");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(vx[k]) || !std::isfinite(vy[k])) {
            throw ConfigError("VelocityField: non-finite entry at node " + std::to_string(k));
        }
    }
}

BuiltinVelocity parse_builtin_velocity(const std::string& name) {
    if (name == "zero") return BuiltinVelocity::zero;
    if (name == "double_gyre") return BuiltinVelocity::double_gyre;
    throw ConfigError("unknown builtin velocity kind: '" + name + "'");
}

namespace {

// Stream function on the grid's bounding box, normalized coordinates
// X, Y in [0,1]:
//   psi(X, Y) = -(s/pi) [ sin(pi X) sin(pi Y) - sin(2 pi X) sin(2 pi Y) ]
// v = (d psi/dy, -d psi/dx) is divergence-free by construction. The first
// mode is a clockwise primary circulation (up the left wall, down the right);
// the second deepens the cells at the top-left and bottom-right and flips the
// remaining two corners into counter-rotating eddies.
struct GyreStream {
    double lx, ly, s;

    Vec2 velocity(double x, double y) const {
        const double pi = M_PI;
        const double X = x;
        const double Y = y;
        const double vx = -(s / ly) * (std::sin(pi * X) * std::cos(pi * Y) -
                                       2.0 * std::sin(2.0 * pi * X) * std::cos(2.0 * pi * Y));
        const double vy = (s / lx) * (std::cos(pi * X) * std::sin(pi * Y) -
                                      2.0 * std::cos(2.0 * pi * X) * std::sin(2.0 * pi * Y));
        return {vx, vy};
    }
};

}  // namespace

VelocityField builtin_velocity(const Grid2D& grid, BuiltinVelocity kind, double strength) {
    grid.validate();
    VelocityField field;
    field.grid = grid;
    field.vx.assign(grid.num_nodes(), 0.0);
    field.vy.assign(grid.num_nodes(), 0.0);
    if (kind == BuiltinVelocity::zero) return field;

    const double lx = grid.xmax() - grid.x0;
    const double ly = grid.ymax() - grid.y0;
    GyreStream gyre{lx, ly, strength};
    for (int j = 0; j < grid.ny; ++j) {
        const double Y = (grid.y(j) - grid.y0) / ly;
        for (int i = 0; i < grid.nx; ++i) {
            const double X = (grid.x(i) - grid.x0) / lx;
            const Vec2 v = gyre.velocity(X, Y);
            field.vx[grid.node(i, j)] = v.x();
            field.vy[grid.node(i, j)] = v.y();
        }
    }
    return field;
}

double cell_peclet(const VelocityField& vel, double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("cell_peclet: kappa must be > 0");
    return vel.max_speed() * std::max(vel.grid.dx, vel.grid.dy) / kappa;
}

}  // namespace oed
