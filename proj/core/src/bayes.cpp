#include "oedpath/bayes.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace oed {

GaussianPrior GaussianPrior::make(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    if (mean.size() != cov.rows() || cov.rows() != cov.cols()) {
        throw ConfigError("GaussianPrior: mean/covariance size mismatch");
    }
    GaussianPrior prior;
    prior.mean = std::move(mean);
    prior.cov = std::move(cov);
    prior.cov = 0.5 * (prior.cov + prior.cov.transpose().eval());
    prior.chol.compute(prior.cov);
    if (prior.chol.info() != Eigen::Success) {
        throw NumericalError("GaussianPrior: covariance is not positive definite");
    }
    return prior;
}

GaussianPrior GaussianPrior::identity(int M, double variance, double mean_value) {
    return make(Eigen::VectorXd::Constant(M, mean_value),
                variance * Eigen::MatrixXd::Identity(M, M));
}

Eigen::MatrixXd GaussianPrior::precision() const {
    return chol.solve(Eigen::MatrixXd::Identity(size(), size()));
}

Eigen::VectorXd GaussianPrior::sample(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(size());
    for (int i = 0; i < size(); ++i) z[i] = gauss(rng);
    return mean + chol.matrixL() * z;
}

Eigen::MatrixXd fisher_matrix(const Eigen::MatrixXd& G, const NoisePrecision& noise) {
    if (G.rows() != noise.n_t) {
        throw ConfigError("fisher_matrix: G has " + std::to_string(G.rows()) +
                          " rows but noise precision has n_t = " + std::to_string(noise.n_t));
    }
    const Eigen::MatrixXd W = noise.apply_matrix(G);
    Eigen::MatrixXd F = G.transpose() * W;
    return 0.5 * (F + F.transpose().eval());
}

PosteriorModel posterior(const Eigen::MatrixXd& fisher, const GaussianPrior& prior) {
    const int M = prior.size();
    if (fisher.rows() != M || fisher.cols() != M) {
        throw ConfigError("posterior: Fisher matrix size mismatch");
    }
    PosteriorModel post;
    post.fisher = fisher;
    Eigen::MatrixXd precision = fisher + prior.precision();
    precision = 0.5 * (precision + precision.transpose().eval());
    post.precision_chol.compute(precision);
    if (post.precision_chol.info() != Eigen::Success) {
        throw NumericalError("posterior: precision is not positive definite");
    }
    post.post_cov = post.precision_chol.solve(Eigen::MatrixXd::Identity(M, M));
    post.post_cov = 0.5 * (post.post_cov + post.post_cov.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.post_cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("posterior: eigendecomposition failed");
    }
    post.eigenvalues = eig.eigenvalues().reverse();
    post.psi_a = post.eigenvalues.sum();
    post.log_psi_d = 0.0;
    for (int i = 0; i < M; ++i) {
        if (!(post.eigenvalues[i] > 0.0)) {
            throw NumericalError("posterior: non-positive covariance eigenvalue");
        }
        post.log_psi_d += std::log(post.eigenvalues[i]);
    }
    post.psi_d = std::exp(post.log_psi_d);
    return post;
}

Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& G, const NoisePrecision& noise,
                               const GaussianPrior& prior, const Eigen::VectorXd& d_obs) {
    if (d_obs.size() != noise.n_t) throw ConfigError("posterior_mean: d_obs size mismatch");
    const PosteriorModel post = posterior(fisher_matrix(G, noise), prior);
    const Eigen::VectorXd rhs =
        G.transpose() * noise.apply(d_obs) + prior.precision() * prior.mean;
    return post.precision_chol.solve(rhs);
}

Eigen::VectorXd estimate_snr(const StateEnsemble& ens, const MeasurementKernel& kernel,
                             const SensorPath& path, const NoisePrecision& noise,
                             const GaussianPrior& prior, int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw ConfigError("estimate_snr: n_samples must be >= 2");
    const ObservationOperator op = assemble_G(ens, kernel, path);
    const int n_t = path.n_t();

    Eigen::VectorXd signal = Eigen::VectorXd::Zero(n_t);
    Eigen::VectorXd noise_pow = Eigen::VectorXd::Zero(n_t);
    for (int s = 0; s < n_samples; ++s) {
        const Eigen::VectorXd d = op.G * prior.sample(seed + 2 * s);
        const Eigen::VectorXd eta = sample_noise(noise, seed + 2 * s + 1);
        signal += d.cwiseProduct(d);
        noise_pow += eta.cwiseProduct(eta);
    }

    Eigen::VectorXd db(n_t);
    for (int k = 0; k < n_t; ++k) {
        if (!(noise_pow[k] > 0.0)) {
            throw DomainError("estimate_snr: zero noise variance at time index " +
                              std::to_string(k));
        }
        db[k] = signal[k] > 0.0
                    ? 10.0 * std::log10(signal[k] / noise_pow[k])
                    : kSnrFloorDb;
        db[k] = std::max(db[k], kSnrFloorDb);
    }
    return db;
}

}  // namespace oed
