// Gaussian prior, Fisher information, posterior covariance, A/D utilities,
// posterior mean, and Monte Carlo SNR estimation.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "oedpath/measurement.hpp"
#include "oedpath/noise.hpp"

namespace oed {

struct GaussianPrior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::LLT<Eigen::MatrixXd> chol;  // of cov

    static GaussianPrior make(Eigen::VectorXd mean, Eigen::MatrixXd cov);
    static GaussianPrior identity(int M, double variance = 1.0, double mean_value = 1.0);

    int size() const { return static_cast<int>(mean.size()); }
    Eigen::MatrixXd precision() const;
    Eigen::VectorXd sample(std::uint64_t seed) const;
};

/// Posterior covariance and the derived quantities used by the OED
/// utilities. Eigenvalues are sorted descending; Psi_D is computed as
/// exp(sum log lambda_i) to avoid under/overflow.
struct PosteriorModel {
    Eigen::MatrixXd fisher;
    Eigen::MatrixXd post_cov;
    Eigen::LLT<Eigen::MatrixXd> precision_chol;  // of fisher + prior precision
    Eigen::VectorXd eigenvalues;
    double psi_a = 0.0;
    double psi_d = 0.0;
    double log_psi_d = 0.0;
};

struct ObservationRecord {
    std::vector<double> times;
    Eigen::VectorXd values;
    std::string path_id;
};

/// G^T Sigma_noise^-1 G, symmetrized.
Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXd& G, const NoisePrecision& noise);

PosteriorModel posterior(const Eigen::MatrixXd& fisher, const GaussianPrior& prior);

/// Solves (fisher + Sigma_pr^-1) m = G^T Sigma^-1 d_obs + Sigma_pr^-1 m_pr.
Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& G, const NoisePrecision& noise,
                               const GaussianPrior& prior, const Eigen::VectorXd& d_obs);

/// Per-time-step signal-to-noise ratio 10·log10(E[d_k^2]/E[eta_k^2]) from
/// Monte Carlo over the prior and the noise model. Zero signal power is
/// reported as the sentinel floor.
constexpr double kSnrFloorDb = -400.0;
Eigen::VectorXd estimate_snr(const StateEnsemble& ens, const MeasurementKernel& kernel,
                             const SensorPath& path, const NoisePrecision& noise,
                             const GaussianPrior& prior, int n_samples, std::uint64_t seed);

}  // namespace oed
