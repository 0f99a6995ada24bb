#include "oedpath/noise.hpp"

#include <cmath>
#include <random>

namespace oed {

namespace {

// Sigma^-1 = L L^T with L lower bidiagonal.
void factor(NoisePrecision& p) {
    const int n = p.n_t;
    p.chol_diag.resize(n);
    p.chol_off.resize(n - 1);
    p.positive_definite = true;
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
        double d = p.diag[k] - (k > 0 ? prev * prev : 0.0);
        if (!(d > 0.0)) {
            p.positive_definite = false;
            p.chol_diag.resize(0);
            p.chol_off.resize(0);
            return;
        }
        p.chol_diag[k] = std::sqrt(d);
        if (k < n - 1) {
            prev = p.offdiag[k] / p.chol_diag[k];
            p.chol_off[k] = prev;
        }
    }
}

void require_spd(const NoisePrecision& p, const char* who) {
    if (!p.positive_definite) {
        throw NumericalError(std::string(who) + ": noise precision is not positive definite");
    }
}

}  // namespace

Eigen::VectorXd NoisePrecision::apply(const Eigen::VectorXd& v) const {
    if (v.size() != n_t) throw ConfigError("NoisePrecision::apply: size mismatch");
    Eigen::VectorXd out(n_t);
    for (int k = 0; k < n_t; ++k) {
        double acc = diag[k] * v[k];
        if (k > 0) acc += offdiag[k - 1] * v[k - 1];
        if (k < n_t - 1) acc += offdiag[k] * v[k + 1];
        out[k] = acc;
    }
    return out;
}

Eigen::VectorXd NoisePrecision::solve(const Eigen::VectorXd& v) const {
    if (v.size() != n_t) throw ConfigError("NoisePrecision::solve: size mismatch");
    require_spd(*this, "NoisePrecision::solve");
    Eigen::VectorXd x(n_t);
    // L y = v
    for (int k = 0; k < n_t; ++k) {
        double acc = v[k];
        if (k > 0) acc -= chol_off[k - 1] * x[k - 1];
        x[k] = acc / chol_diag[k];
    }
    // L^T x = y
    for (int k = n_t - 1; k >= 0; --k) {
        double acc = x[k];
        if (k < n_t - 1) acc -= chol_off[k] * x[k + 1];
        x[k] = acc / chol_diag[k];
    }
    return x;
}

Eigen::MatrixXd NoisePrecision::apply_matrix(const Eigen::MatrixXd& m) const {
    if (m.rows() != n_t) throw ConfigError("NoisePrecision::apply_matrix: size mismatch");
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.col(c) = apply(m.col(c));
    return out;
}

NoisePrecision build_noise_precision(int n_t, double dt, double a_diffusion, double a_reaction) {
    if (n_t < 2) throw ConfigError("build_noise_precision: n_t must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("build_noise_precision: dt must be > 0");

    NoisePrecision p;
    p.n_t = n_t;
    p.dt = dt;
    p.a_diffusion = a_diffusion;
    p.a_reaction = a_reaction;
    p.diag.resize(n_t);
    p.offdiag.resize(n_t - 1);
    const double stiff_i = 2.0 / dt, stiff_e = 1.0 / dt;
    const double mass_i = 2.0 * dt / 3.0, mass_e = dt / 3.0;
    for (int k = 0; k < n_t; ++k) {
        const bool end = (k == 0 || k == n_t - 1);
        p.diag[k] = a_diffusion * (end ? stiff_e : stiff_i) + a_reaction * (end ? mass_e : mass_i);
    }
    p.offdiag.setConstant(-a_diffusion / dt + a_reaction * dt / 6.0);
    factor(p);
    return p;
}

NoisePrecision noise_precision_from_bands(double dt, Eigen::VectorXd diag,
                                          Eigen::VectorXd offdiag) {
    if (diag.size() < 2 || offdiag.size() != diag.size() - 1) {
        throw ConfigError("noise_precision_from_bands: band size mismatch");
    }
    NoisePrecision p;
    p.n_t = static_cast<int>(diag.size());
    p.dt = dt;
    p.diag = std::move(diag);
    p.offdiag = std::move(offdiag);
    factor(p);
    return p;
}

Eigen::VectorXd sample_noise(const NoisePrecision& noise, std::uint64_t seed) {
    require_spd(noise, "sample_noise");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(noise.n_t);
    for (int k = 0; k < noise.n_t; ++k) z[k] = gauss(rng);
    // eta = L^-T z so that Cov(eta) = (L L^T)^-1 = Sigma.
    Eigen::VectorXd eta(noise.n_t);
    for (int k = noise.n_t - 1; k >= 0; --k) {
        double acc = z[k];
        if (k < noise.n_t - 1) acc -= noise.chol_off[k] * eta[k + 1];
        eta[k] = acc / noise.chol_diag[k];
    }
    return eta;
}

}  // namespace oed
