#include "oedpath/obstacles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

#include "oedpath/errors.hpp"

namespace oed {

namespace {

Eigen::Matrix2d rotation(double angle) {
    Eigen::Matrix2d R;
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return R;
}

}  // namespace

EllipsoidObstacle EllipsoidObstacle::from_axes(Vec2 center, double a, double b, double angle) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("ellipsoid obstacle: semi-axes must be > 0");
    const Eigen::Matrix2d R = rotation(angle);
    Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
    D(0, 0) = 1.0 / (a * a);
    D(1, 1) = 1.0 / (b * b);
    EllipsoidObstacle e;
    e.center = center;
    e.W = R * D * R.transpose();
    return e;
}

RectangleObstacle RectangleObstacle::from_extents(Vec2 center, double half_width,
                                                  double half_height, double angle) {
    if (!(half_width > 0.0) || !(half_height > 0.0)) {
        throw ConfigError("rectangle obstacle: half extents must be > 0");
    }
    Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
    S(0, 0) = 1.0 / half_width;
    S(1, 1) = 1.0 / half_height;
    RectangleObstacle r;
    r.T = S * rotation(-angle);
    r.c = r.T * center;
    return r;
}

ObstacleSet ObstacleSet::for_domain(const Grid2D& grid, double margin) {
    ObstacleSet obs;
    obs.box_lo = {grid.x0, grid.y0};
    obs.box_hi = {grid.xmax(), grid.ymax()};
    obs.margin = margin;
    obs.validate();
    return obs;
}

void ObstacleSet::validate() const {
    if (!(box_hi.x() > box_lo.x()) || !(box_hi.y() > box_lo.y())) {
        throw ConfigError("ObstacleSet: empty domain box");
    }
    if (margin < 0.0) throw ConfigError("ObstacleSet: margin must be >= 0");
    if (2.0 * margin >= std::min(box_hi.x() - box_lo.x(), box_hi.y() - box_lo.y())) {
        throw ConfigError("ObstacleSet: margin leaves no admissible area");
    }
    for (const auto& e : ellipsoids) {
        Eigen::LLT<Eigen::Matrix2d> llt(0.5 * (e.W + e.W.transpose()));
        if (llt.info() != Eigen::Success) {
            throw ConfigError("ObstacleSet: ellipsoid weight matrix is not SPD");
        }
    }
    for (const auto& r : rectangles) {
        if (std::abs(r.T.determinant()) < 1e-14) {
            throw ConfigError("ObstacleSet: rectangle transform is singular");
        }
    }
    if (!(smooth_beta > 0.0)) throw ConfigError("ObstacleSet: smooth_beta must be > 0");
}

namespace {

struct PointEval {
    double margin;
    Vec2 grad;
};

PointEval box_face(const ObstacleSet& obs, const Vec2& p, int face) {
    switch (face) {
        case 0: return {p.x() - (obs.box_lo.x() + obs.margin), Vec2(1.0, 0.0)};
        case 1: return {(obs.box_hi.x() - obs.margin) - p.x(), Vec2(-1.0, 0.0)};
        case 2: return {p.y() - (obs.box_lo.y() + obs.margin), Vec2(0.0, 1.0)};
        default: return {(obs.box_hi.y() - obs.margin) - p.y(), Vec2(0.0, -1.0)};
    }
}

PointEval ellipsoid_eval(const EllipsoidObstacle& e, const Vec2& p) {
    const Vec2 d = p - e.center;
    return {d.dot(e.W * d) - 1.0, 2.0 * (e.W * d)};
}

PointEval rectangle_exact(const RectangleObstacle& r, const Vec2& p) {
    const Vec2 q = r.T * p - r.c;
    const int face = std::abs(q.x()) >= std::abs(q.y()) ? 0 : 1;
    const double s = q[face] >= 0.0 ? 1.0 : -1.0;
    return {q.cwiseAbs().maxCoeff() - 1.0, s * r.T.row(face).transpose()};
}

PointEval rectangle_smooth(const RectangleObstacle& r, const Vec2& p, double beta) {
    const Vec2 q = r.T * p - r.c;
    const double faces[4] = {q.x(), -q.x(), q.y(), -q.y()};
    const Vec2 grads[4] = {r.T.row(0).transpose(), -r.T.row(0).transpose(),
                           r.T.row(1).transpose(), -r.T.row(1).transpose()};
    double m = faces[0];
    for (double f : faces) m = std::max(m, f);
    double z = 0.0;
    Vec2 gz = Vec2::Zero();
    for (int s = 0; s < 4; ++s) {
        const double w = std::exp(beta * (faces[s] - m));
        z += w;
        gz += w * grads[s];
    }
    // Normalized log-sum-exp underestimates the max by at most log(4)/beta.
    return {m + std::log(z / 4.0) / beta - 1.0, gz / z};
}

ConstraintValues eval_impl(const ObstacleSet& obs, const SensorPath& path, bool smooth) {
    obs.validate();
    const int n_t = path.n_t();
    const int n_c = obs.num_constraints();
    ConstraintValues out;
    out.margins.resize(n_c, n_t);
    out.grad_x.resize(n_c, n_t);
    out.grad_y.resize(n_c, n_t);
    for (int k = 0; k < n_t; ++k) {
        const Vec2& p = path.positions[k];
        int j = 0;
        auto put = [&](const PointEval& e) {
            out.margins(j, k) = e.margin;
            out.grad_x(j, k) = e.grad.x();
            out.grad_y(j, k) = e.grad.y();
            ++j;
        };
        for (int face = 0; face < 4; ++face) put(box_face(obs, p, face));
        for (const auto& e : obs.ellipsoids) put(ellipsoid_eval(e, p));
        for (const auto& r : obs.rectangles) {
            put(smooth ? rectangle_smooth(r, p, obs.smooth_beta) : rectangle_exact(r, p));
        }
    }
    out.min_margin = out.margins.minCoeff();
    return out;
}

}  // namespace

ConstraintValues constraint_eval(const ObstacleSet& obs, const SensorPath& path) {
    return eval_impl(obs, path, false);
}

ConstraintValues constraint_eval_smooth(const ObstacleSet& obs, const SensorPath& path) {
    return eval_impl(obs, path, true);
}

Eigen::VectorXd point_margins(const ObstacleSet& obs, const Vec2& p) {
    SensorPath single;
    single.times = {0.0};
    single.positions = {p};
    single.headings = {0.0};
    return constraint_eval(obs, single).margins.col(0);
}

}  // namespace oed
