// Path constraints: domain box with safety margin, ellipsoid and rectangle
// obstacles. Feasible iff every margin is >= 0.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "oedpath/controls.hpp"
#include "oedpath/grid.hpp"

namespace oed {

/// Keep-out region |p - c|_W^2 >= 1 with W symmetric positive definite.
struct EllipsoidObstacle {
    Vec2 center = Vec2::Zero();
    Eigen::Matrix2d W = Eigen::Matrix2d::Identity();

    /// From semi-axes a, b rotated by angle: W = R diag(1/a^2, 1/b^2) R^T.
    static EllipsoidObstacle from_axes(Vec2 center, double a, double b, double angle = 0.0);
};

/// Keep-out region |T p - c|_inf >= 1; T maps the excluded rectangle to the
/// unit square.
struct RectangleObstacle {
    Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
    Vec2 c = Vec2::Zero();

    /// Axis-aligned-then-rotated rectangle with the given half widths.
    static RectangleObstacle from_extents(Vec2 center, double half_width, double half_height,
                                          double angle = 0.0);
};

struct ObstacleSet {
    std::vector<EllipsoidObstacle> ellipsoids;
    std::vector<RectangleObstacle> rectangles;
    Vec2 box_lo = Vec2::Zero();       // flight-domain bounding box
    Vec2 box_hi = Vec2::Ones();
    double margin = 0.02;             // safety distance to the box edge
    double smooth_beta = 50.0;        // sharpness of the rectangle smooth-max

    static ObstacleSet for_domain(const Grid2D& grid, double margin = 0.02);

    /// 4 box faces + ellipsoids + rectangles.
    int num_constraints() const {
        return 4 + static_cast<int>(ellipsoids.size()) + static_cast<int>(rectangles.size());
    }

    void validate() const;
};

/// Margins g[j][k] of constraint j at path point k, with the gradients
/// dg[j][k]/dp_k. The exact variant uses the true infinity norm for
/// rectangles (gradient of the active face; at exact ties the first maximal
/// face is used). The smooth variant replaces it by a normalized softmax
/// that underestimates the true margin by at most log(4)/beta, so smooth
/// feasibility implies exact feasibility.
struct ConstraintValues {
    Eigen::MatrixXd margins;  // n_constr x n_t
    Eigen::MatrixXd grad_x;   // d margin / d p_{k,x}
    Eigen::MatrixXd grad_y;
    double min_margin = 0.0;

    bool feasible() const { return min_margin >= 0.0; }
};

ConstraintValues constraint_eval(const ObstacleSet& obs, const SensorPath& path);
ConstraintValues constraint_eval_smooth(const ObstacleSet& obs, const SensorPath& path);

/// Margins of a single point (exact); used by grid-search masking and tests.
Eigen::VectorXd point_margins(const ObstacleSet& obs, const Vec2& p);

}  // namespace oed
