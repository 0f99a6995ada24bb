// Measurement kernels: what the sensor reads around its position.
#pragma once

#include <cmath>
#include <string>

#include "oedpath/errors.hpp"

namespace oed {

enum class KernelKind { pointwise, gaussian, uniform_ball };

/// pointwise     : point evaluation of the state at the sensor position.
/// gaussian      : Gaussian-weighted integral, fixed constant (2·pi·sigma^2)^-1,
///                 not renormalized. Truncation starts at 5·sigma (tail mass
///                 < 1e-5); instead of a sharp cut, a cubic roll-off on
///                 [5, 6]·sigma takes the weight to zero so the discrete
///                 measurement stays C^1 in the sensor position (a sharp cut
///                 makes finite differences jump when a grid node crosses the
///                 truncation circle). Weights within 5·sigma are the exact
///                 kernel values.
/// uniform_ball  : average over the ball of radius r, evaluated on a Cartesian
///                 quadrature of roughly n_quad nodes masked to the ball.
struct MeasurementKernel {
    KernelKind kind = KernelKind::pointwise;
    double sigma = 0.0;
    double radius = 0.0;
    int n_quad = 529;

    static MeasurementKernel pointwise() { return {}; }
    static MeasurementKernel gaussian(double sigma) {
        MeasurementKernel k;
        k.kind = KernelKind::gaussian;
        k.sigma = sigma;
        k.validate();
        return k;
    }
    static MeasurementKernel uniform_ball(double radius, int n_quad = 529) {
        MeasurementKernel k;
        k.kind = KernelKind::uniform_ball;
        k.radius = radius;
        k.n_quad = n_quad;
        k.validate();
        return k;
    }

    double truncation_radius() const { return 5.0 * sigma; }
    double support_radius() const { return 6.0 * sigma; }

    void validate() const {
        if (kind == KernelKind::gaussian && !(sigma > 0.0)) {
            throw ConfigError("gaussian kernel: sigma must be > 0");
        }
        if (kind == KernelKind::uniform_ball) {
            if (!(radius > 0.0)) throw ConfigError("uniform_ball kernel: radius must be > 0");
            if (n_quad < 9) throw ConfigError("uniform_ball kernel: n_quad must be >= 9");
        }
    }
};

inline KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "pointwise") return KernelKind::pointwise;
    if (name == "gaussian") return KernelKind::gaussian;
    if (name == "uniform_ball") return KernelKind::uniform_ball;
    throw ConfigError("unknown kernel kind: '" + name + "'");
}

}  // namespace oed
