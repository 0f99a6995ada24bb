#include "oedpath/reduced.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <random>

namespace oed {

Eigen::VectorXd ReducedBasis::project(const std::vector<double>& field) const {
    if (field.size() != static_cast<std::size_t>(grid.num_nodes())) {
        throw ConfigError("ReducedBasis::project: field has wrong node count");
    }
    Eigen::VectorXd coords(M_r);
    const Eigen::Map<const Eigen::VectorXd> f(field.data(), field.size());
    for (int i = 0; i < M_r; ++i) {
        coords[i] = cell_area() *
                    Eigen::Map<const Eigen::VectorXd>(vectors[i].data(), f.size()).dot(f);
    }
    return coords;
}

std::vector<double> ReducedBasis::reconstruct(const Eigen::VectorXd& coords) const {
    if (coords.size() != M_r) throw ConfigError("ReducedBasis::reconstruct: size mismatch");
    std::vector<double> out(grid.num_nodes(), 0.0);
    for (int i = 0; i < M_r; ++i) {
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += coords[i] * vectors[i][n];
    }
    return out;
}

ReducedBasis pca_basis(const Grid2D& grid, const std::vector<std::vector<double>>& samples,
                       int M_r) {
    grid.validate();
    const int n_s = static_cast<int>(samples.size());
    if (M_r < 1) throw ConfigError("pca_basis: M_r must be >= 1");
    if (n_s < M_r) throw ConfigError("pca_basis: need at least M_r samples");
    const int nodes = grid.num_nodes();

    Eigen::MatrixXd X(nodes, n_s);
    for (int s = 0; s < n_s; ++s) {
        if (samples[s].size() != static_cast<std::size_t>(nodes)) {
            throw ConfigError("pca_basis: sample " + std::to_string(s) +
                              " has wrong node count");
        }
        X.col(s) = Eigen::Map<const Eigen::VectorXd>(samples[s].data(), nodes);
    }

    // Gram route: eigenpairs of w X^T X give the weighted-SVD directions.
    const Eigen::MatrixXd gram = grid.cell_area() * (X.transpose() * X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("pca_basis: eigensolve failed");
    const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
    const double total_energy = std::max(lambda.sum(), 0.0);
    const double rank_tol = 1e-12 * std::max(lambda[0], 0.0);

    int rank = 0;
    while (rank < n_s && lambda[rank] > rank_tol) ++rank;
    if (rank < M_r) {
        std::cerr << "warning: pca_basis requested " << M_r << " modes but samples have rank "
                  << rank << "\n";
        M_r = rank;
    }
    if (M_r < 1) throw NumericalError("pca_basis: samples are all zero");

    ReducedBasis basis;
    basis.grid = grid;
    basis.M_r = M_r;
    basis.singular_values.resize(M_r);
    basis.vectors.resize(M_r);
    for (int i = 0; i < M_r; ++i) {
        const double s = std::sqrt(lambda[i]);
        basis.singular_values[i] = s;
        // Gram u = lambda u with |u| = 1, so |X u|_w = sqrt(lambda) = s.
        const Eigen::VectorXd u = eig.eigenvectors().col(n_s - 1 - i);
        const Eigen::VectorXd v = X * u / s;
        basis.vectors[i].assign(v.data(), v.data() + v.size());
    }
    double captured = 0.0;
    for (int i = 0; i < M_r; ++i) captured += lambda[i];
    basis.energy_fraction = total_energy > 0.0 ? captured / total_energy : 1.0;
    return basis;
}

std::vector<std::vector<double>> sample_se_prior(const Grid2D& grid,
                                                 const SquaredExponentialPrior& prior,
                                                 int n_samples, std::uint64_t seed) {
    grid.validate();
    if (n_samples < 1) throw ConfigError("sample_se_prior: n_samples must be >= 1");
    if (!(prior.variance > 0.0) || !(prior.length_scale > 0.0)) {
        throw ConfigError("sample_se_prior: variance and length_scale must be > 0");
    }
    const int side = std::clamp(prior.sample_grid, 3, 64);  // <= 4096 coarse nodes
    Grid2D coarse;
    coarse.nx = side;
    coarse.ny = side;
    coarse.x0 = grid.x0;
    coarse.y0 = grid.y0;
    coarse.dx = (grid.xmax() - grid.x0) / (side - 1);
    coarse.dy = (grid.ymax() - grid.y0) / (side - 1);

    const int nc = coarse.num_nodes();
    Eigen::MatrixXd C(nc, nc);
    const double il2 = 1.0 / (2.0 * prior.length_scale * prior.length_scale);
    for (int a = 0; a < nc; ++a) {
        const Vec2 pa(coarse.x(a % side), coarse.y(a / side));
        for (int b = 0; b <= a; ++b) {
            const Vec2 pb(coarse.x(b % side), coarse.y(b / side));
            const double c = prior.variance * std::exp(-(pa - pb).squaredNorm() * il2);
            C(a, b) = c;
            C(b, a) = c;
        }
    }
    C.diagonal().array() += prior.nugget * prior.variance;
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("sample_se_prior: covariance Cholesky failed");
    }

    std::vector<std::vector<double>> samples(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(s));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd z(nc);
        for (int a = 0; a < nc; ++a) z[a] = gauss(rng);
        const Eigen::VectorXd y = llt.matrixL() * z;

        // Bilinear prolongation onto the fine grid.
        samples[s].resize(grid.num_nodes());
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                const Vec2 p(grid.x(i), grid.y(j));
                samples[s][grid.node(i, j)] = interp(coarse, y.data(), locate(coarse, p));
            }
        }
    }
    return samples;
}

GaussianPrior reduced_prior_from_basis(const ReducedBasis& basis, int n_samples) {
    if (n_samples < 1) throw ConfigError("reduced_prior_from_basis: n_samples must be >= 1");
    const Eigen::VectorXd var = basis.singular_values.array().square() / n_samples;
    return GaussianPrior::make(Eigen::VectorXd::Zero(basis.M_r),
                               Eigen::MatrixXd(var.asDiagonal()));
}

PosteriorModel reduced_posterior(const ReducedBasis& basis, const StateEnsemble& basis_ensemble,
                                 const MeasurementKernel& kernel, const SensorPath& path,
                                 const NoisePrecision& noise,
                                 const GaussianPrior& prior_reduced) {
    if (basis_ensemble.M != basis.M_r) {
        throw ConfigError("reduced_posterior: ensemble was not built from the basis fields");
    }
    if (prior_reduced.size() != basis.M_r) {
        throw ConfigError("reduced_posterior: reduced prior has wrong dimension");
    }
    const ObservationOperator op = assemble_G(basis_ensemble, kernel, path);
    return posterior(fisher_matrix(op.G, noise), prior_reduced);
}

FieldFile to_field_file(const ReducedBasis& basis) {
    FieldFile file;
    file.grid = basis.grid;
    file.n_frames = 1;
    file.n_components = basis.M_r;
    const std::size_t nodes = static_cast<std::size_t>(basis.grid.num_nodes());
    file.values.resize(static_cast<std::size_t>(basis.M_r) * nodes);
    for (int i = 0; i < basis.M_r; ++i) {
        std::copy(basis.vectors[i].begin(), basis.vectors[i].end(), file.component(0, i));
    }
    return file;
}

ReducedBasis basis_from_field_file(const FieldFile& file) {
    file.validate();
    if (file.n_frames != 1) throw ConfigError("basis OEDF file must have n_frames = 1");
    ReducedBasis basis;
    basis.grid = file.grid;
    basis.M_r = file.n_components;
    basis.vectors.resize(basis.M_r);
    basis.singular_values = Eigen::VectorXd::Zero(basis.M_r);
    basis.energy_fraction = 1.0;
    const std::size_t nodes = static_cast<std::size_t>(file.grid.num_nodes());
    for (int i = 0; i < basis.M_r; ++i) {
        basis.vectors[i].assign(file.component(0, i), file.component(0, i) + nodes);
    }
    return basis;
}

}  // namespace oed
