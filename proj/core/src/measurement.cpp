#include "oedpath/measurement.hpp"

#include <cmath>

namespace oed {

namespace {

// Time-interpolated node accessor for one ensemble component.
struct FrameView {
    const double* lo;
    const double* hi;
    double w;

    double operator()(int node) const { return (1.0 - w) * lo[node] + w * hi[node]; }
};

FrameView frame_view(const StateEnsemble& ens, int m, const StateEnsemble::TimeBracket& b) {
    return {ens.frame(m, b.lo), ens.frame(m, b.hi), b.w};
}

double interp_value(const Grid2D& g, const FrameView& u, const CellCoords& c) {
    const double v00 = u(g.node(c.i, c.j));
    const double v10 = u(g.node(c.i + 1, c.j));
    const double v01 = u(g.node(c.i, c.j + 1));
    const double v11 = u(g.node(c.i + 1, c.j + 1));
    return (1.0 - c.tx) * (1.0 - c.ty) * v00 + c.tx * (1.0 - c.ty) * v10 +
           (1.0 - c.tx) * c.ty * v01 + c.tx * c.ty * v11;
}

Vec2 interp_grad(const Grid2D& g, const FrameView& u, const CellCoords& c) {
    const double v00 = u(g.node(c.i, c.j));
    const double v10 = u(g.node(c.i + 1, c.j));
    const double v01 = u(g.node(c.i, c.j + 1));
    const double v11 = u(g.node(c.i + 1, c.j + 1));
    return {((1.0 - c.ty) * (v10 - v00) + c.ty * (v11 - v01)) / g.dx,
            ((1.0 - c.tx) * (v01 - v00) + c.tx * (v11 - v10)) / g.dy};
}

// C^1 cutoff between the taper radius and the truncation radius: value 1
// inside, cubic descent to 0 at the boundary. Keeps the truncated Gaussian
// weight and its position gradient continuous.
struct Taper {
    double r0, r1;

    double value(double d) const {
        if (d <= r0) return 1.0;
        if (d >= r1) return 0.0;
        const double s = (d - r0) / (r1 - r0);
        return 1.0 - s * s * (3.0 - 2.0 * s);
    }
    double slope(double d) const {
        if (d <= r0 || d >= r1) return 0.0;
        const double s = (d - r0) / (r1 - r0);
        return -6.0 * s * (1.0 - s) / (r1 - r0);
    }
};

// Node-index window covering [lo, hi] in one grid direction.
struct IndexWindow {
    int first;
    int last;  // inclusive; empty when first > last
};

IndexWindow window(double lo, double hi, double origin, double h, int n) {
    IndexWindow w;
    w.first = std::max(0, static_cast<int>(std::ceil((lo - origin) / h)));
    w.last = std::min(n - 1, static_cast<int>(std::floor((hi - origin) / h)));
    return w;
}

// Quadrature points of the ball: cell centers of a side x side partition of
// the circumscribing square, masked to the ball. side is odd so the set is
// symmetric about the center.
std::vector<Vec2> ball_offsets(const MeasurementKernel& kernel) {
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(kernel.n_quad))));
    side = std::max(3, side);
    if (side % 2 == 0) ++side;
    const double r = kernel.radius;
    const double h = 2.0 * r / side;
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(side) * side);
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) {
            const Vec2 q(-r + (a + 0.5) * h, -r + (b + 0.5) * h);
            if (q.squaredNorm() <= r * r) pts.push_back(q);
        }
    }
    return pts;
}

void check_pos(const StateEnsemble& ens, const Vec2& pos) {
    if (!ens.grid.contains(pos)) {
        throw DomainError("sensor position (" + std::to_string(pos.x()) + ", " +
                          std::to_string(pos.y()) + ") outside grid");
    }
}

}  // namespace

Eigen::VectorXd measure(const StateEnsemble& ens, const MeasurementKernel& kernel,
                        const Vec2& pos, double t) {
    kernel.validate();
    check_pos(ens, pos);
    const Grid2D& g = ens.grid;
    const auto b = ens.bracket(t);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ens.M);

    switch (kernel.kind) {
        case KernelKind::pointwise: {
            const CellCoords c = locate(g, pos);
            for (int m = 0; m < ens.M; ++m) {
                out[m] = interp_value(g, frame_view(ens, m, b), c);
            }
            break;
        }
        case KernelKind::gaussian: {
            const double rad = kernel.support_radius();
            const double s2 = kernel.sigma * kernel.sigma;
            const double norm = 1.0 / (2.0 * M_PI * s2);
            const double area = g.cell_area();
            const Taper taper{kernel.truncation_radius(), rad};
            const auto wx = window(pos.x() - rad, pos.x() + rad, g.x0, g.dx, g.nx);
            const auto wy = window(pos.y() - rad, pos.y() + rad, g.y0, g.dy, g.ny);
            std::vector<FrameView> views;
            views.reserve(ens.M);
            for (int m = 0; m < ens.M; ++m) views.push_back(frame_view(ens, m, b));
            for (int j = wy.first; j <= wy.last; ++j) {
                for (int i = wx.first; i <= wx.last; ++i) {
                    const double d2 = (Vec2(g.x(i), g.y(j)) - pos).squaredNorm();
                    if (d2 >= rad * rad) continue;
                    const double w =
                        norm * std::exp(-0.5 * d2 / s2) * taper.value(std::sqrt(d2)) * area;
                    const int n = g.node(i, j);
                    for (int m = 0; m < ens.M; ++m) out[m] += w * views[m](n);
                }
            }
            break;
        }
        case KernelKind::uniform_ball: {
            const auto offsets = ball_offsets(kernel);
            for (int m = 0; m < ens.M; ++m) {
                const FrameView u = frame_view(ens, m, b);
                double acc = 0.0;
                for (const Vec2& q : offsets) {
                    const Vec2 p = pos + q;
                    if (!g.contains(p)) continue;  // zero extension
                    acc += interp_value(g, u, locate(g, p));
                }
                out[m] = acc / static_cast<double>(offsets.size());
            }
            break;
        }
    }
    return out;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> measure_derivative(const StateEnsemble& ens,
                                                            const MeasurementKernel& kernel,
                                                            const Vec2& pos, double t) {
    kernel.validate();
    check_pos(ens, pos);
    const Grid2D& g = ens.grid;
    const auto b = ens.bracket(t);
    Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, ens.M);
    out.setZero();

    switch (kernel.kind) {
        case KernelKind::pointwise: {
            const CellCoords c = locate(g, pos);
            for (int m = 0; m < ens.M; ++m) {
                out.col(m) = interp_grad(g, frame_view(ens, m, b), c);
            }
            break;
        }
        case KernelKind::gaussian: {
            // Kernel-gradient form: grad_y [K(x, y) rho(|x - y|)] evaluated
            // analytically; the taper keeps this the exact derivative of the
            // discrete measurement.
            const double rad = kernel.support_radius();
            const double s2 = kernel.sigma * kernel.sigma;
            const double norm = 1.0 / (2.0 * M_PI * s2);
            const double area = g.cell_area();
            const Taper taper{kernel.truncation_radius(), rad};
            const auto wx = window(pos.x() - rad, pos.x() + rad, g.x0, g.dx, g.nx);
            const auto wy = window(pos.y() - rad, pos.y() + rad, g.y0, g.dy, g.ny);
            std::vector<FrameView> views;
            views.reserve(ens.M);
            for (int m = 0; m < ens.M; ++m) views.push_back(frame_view(ens, m, b));
            for (int j = wy.first; j <= wy.last; ++j) {
                for (int i = wx.first; i <= wx.last; ++i) {
                    const Vec2 x(g.x(i), g.y(j));
                    const double d2 = (x - pos).squaredNorm();
                    if (d2 >= rad * rad) continue;
                    const double d = std::sqrt(d2);
                    const double gauss = norm * std::exp(-0.5 * d2 / s2) * area;
                    // d/dy exp(.) -> +(x - y)/s2; d/dy rho(|x - y|) -> -rho' (x - y)/|x - y|.
                    Vec2 w = gauss * taper.value(d) * (x - pos) / s2;
                    if (d > 0.0) w -= gauss * taper.slope(d) * (x - pos) / d;
                    const int n = g.node(i, j);
                    for (int m = 0; m < ens.M; ++m) out.col(m) += w * views[m](n);
                }
            }
            break;
        }
        case KernelKind::uniform_ball: {
            // State-gradient form: average of du/dx_i over the ball, with the
            // state gradient taken from the same bilinear representation the
            // measurement integrates, so the derivative is exactly the
            // derivative of the discrete measurement.
            const auto offsets = ball_offsets(kernel);
            for (int m = 0; m < ens.M; ++m) {
                const FrameView u = frame_view(ens, m, b);
                Vec2 acc = Vec2::Zero();
                for (const Vec2& q : offsets) {
                    const Vec2 p = pos + q;
                    if (!g.contains(p)) continue;  // zero extension
                    acc += interp_grad(g, u, locate(g, p));
                }
                out.col(m) = acc / static_cast<double>(offsets.size());
            }
            break;
        }
    }
    return out;
}

ObservationOperator assemble_G(const StateEnsemble& ens, const MeasurementKernel& kernel,
                               const SensorPath& path) {
    ObservationOperator op;
    op.times = path.times;
    op.G.resize(path.n_t(), ens.M);
    for (int k = 0; k < path.n_t(); ++k) {
        try {
            op.G.row(k) = measure(ens, kernel, path.positions[k], path.times[k]).transpose();
        } catch (const DomainError& e) {
            throw EvaluationError(std::string(e.what()) + " (time index " + std::to_string(k) + ")",
                                  k);
        }
    }
    return op;
}

ObservationDerivatives assemble_dG(const StateEnsemble& ens, const MeasurementKernel& kernel,
                                   const SensorPath& path) {
    ObservationDerivatives d;
    d.dx.resize(path.n_t(), ens.M);
    d.dy.resize(path.n_t(), ens.M);
    for (int k = 0; k < path.n_t(); ++k) {
        try {
            const auto grad = measure_derivative(ens, kernel, path.positions[k], path.times[k]);
            d.dx.row(k) = grad.row(0);
            d.dy.row(k) = grad.row(1);
        } catch (const DomainError& e) {
            throw EvaluationError(std::string(e.what()) + " (time index " + std::to_string(k) + ")",
                                  k);
        }
    }
    return d;
}

}  // namespace oed
