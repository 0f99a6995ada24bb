// Uniform 2-D node grid and bilinear interpolation of nodal fields.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "oedpath/errors.hpp"

namespace oed {

using Vec2 = Eigen::Vector2d;

/// Uniform tensor grid of nx × ny nodes; node (i,j) sits at
/// (x0 + i·dx, y0 + j·dy), flat index j·nx + i.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;

    static Grid2D unit_square(int nx, int ny) {
        Grid2D g;
        g.nx = nx;
        g.ny = ny;
        g.dx = 1.0 / (nx - 1);
        g.dy = 1.0 / (ny - 1);
        g.validate();
        return g;
    }

    int num_nodes() const { return nx * ny; }
    int node(int i, int j) const { return j * nx + i; }
    double x(int i) const { return x0 + i * dx; }
    double y(int j) const { return y0 + j * dy; }
    double xmax() const { return x0 + (nx - 1) * dx; }
    double ymax() const { return y0 + (ny - 1) * dy; }
    double cell_area() const { return dx * dy; }

    bool contains(const Vec2& p) const {
        return p.x() >= x0 && p.x() <= xmax() && p.y() >= y0 && p.y() <= ymax();
    }

    void validate() const {
        if (nx < 3 || ny < 3) throw ConfigError("Grid2D: nx and ny must be >= 3");
        if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("Grid2D: dx and dy must be > 0");
    }

    bool operator==(const Grid2D&) const = default;
};

/// Cell-local coordinates of a point: cell corner (i,j) and fractional
/// offsets tx, ty in [0,1].
struct CellCoords {
    int i = 0;
    int j = 0;
    double tx = 0.0;
    double ty = 0.0;
};

/// Locate p inside the grid bounding box. Throws DomainError when outside.
inline CellCoords locate(const Grid2D& g, const Vec2& p) {
    if (!g.contains(p)) {
        throw DomainError("position (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                          ") outside grid bounding box");
    }
    CellCoords c;
    double fx = (p.x() - g.x0) / g.dx;
    double fy = (p.y() - g.y0) / g.dy;
    c.i = std::min(static_cast<int>(fx), g.nx - 2);
    c.j = std::min(static_cast<int>(fy), g.ny - 2);
    c.tx = fx - c.i;
    c.ty = fy - c.j;
    return c;
}

/// Bilinear interpolation of a nodal field at cell-local coordinates.
inline double interp(const Grid2D& g, const double* values, const CellCoords& c) {
    const double v00 = values[g.node(c.i, c.j)];
    const double v10 = values[g.node(c.i + 1, c.j)];
    const double v01 = values[g.node(c.i, c.j + 1)];
    const double v11 = values[g.node(c.i + 1, c.j + 1)];
    return (1.0 - c.tx) * (1.0 - c.ty) * v00 + c.tx * (1.0 - c.ty) * v10 +
           (1.0 - c.tx) * c.ty * v01 + c.tx * c.ty * v11;
}

inline double interp(const Grid2D& g, const std::vector<double>& values, const Vec2& p) {
    return interp(g, values.data(), locate(g, p));
}

/// Gradient of the bilinear interpolant; piecewise constant per cell in each
/// direction, discontinuous across cell edges.
inline Vec2 interp_gradient(const Grid2D& g, const double* values, const CellCoords& c) {
    const double v00 = values[g.node(c.i, c.j)];
    const double v10 = values[g.node(c.i + 1, c.j)];
    const double v01 = values[g.node(c.i, c.j + 1)];
    const double v11 = values[g.node(c.i + 1, c.j + 1)];
    const double gx = ((1.0 - c.ty) * (v10 - v00) + c.ty * (v11 - v01)) / g.dx;
    const double gy = ((1.0 - c.tx) * (v01 - v00) + c.tx * (v11 - v10)) / g.dy;
    return {gx, gy};
}

}  // namespace oed
