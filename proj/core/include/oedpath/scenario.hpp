// Scenario configuration (JSON), problem assembly, and the CSV/plot-ready
// exports shared by the command-line driver and the tests.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oedpath/objective.hpp"
#include "oedpath/optimizer.hpp"
#include "oedpath/reduced.hpp"

namespace oed {

struct ObstacleSpec {
    std::string type;  // "ellipsoid" | "rectangle"
    Vec2 center = Vec2::Zero();
    double a = 0.1;  // semi-axis / half width
    double b = 0.1;  // semi-axis / half height
    double angle = 0.0;
};

/// Everything needed to set up one OED instance. Defaults reproduce the
/// desk-scale pollutant scenario: unit square, 65 x 65 grid, kappa = 1e-3,
/// T = 5, two-source release, start (0.2, 0.6), v in [0.05, 0.2],
/// omega in [-2, 2], safety margin 0.02, noise (1, 100), prior N((1,1), I).
struct ScenarioConfig {
    // grid
    int nx = 65, ny = 65;
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    // velocity
    std::string velocity_kind = "double_gyre";  // zero | double_gyre | file
    double velocity_strength = 0.6;
    std::string velocity_file;
    // forward model
    double kappa = 1e-3;
    double T = 5.0;
    double ds = 5e-3;
    int store_stride = 1;
    // parameter basis
    std::string basis_kind = "two_source";  // two_source | file
    Vec2 source1{0.1, 0.9};
    Vec2 source2{0.7, 0.1};
    double source_cap = 0.5;
    double source_width = 100.0;
    std::string basis_file;
    // kernel
    std::string kernel_kind = "pointwise";
    double kernel_sigma = 0.05;
    double kernel_radius = 0.015;
    int kernel_quad = 529;
    // noise
    double noise_diffusion = 1.0;
    double noise_reaction = 100.0;
    // prior (empty mean: N((1,..,1), scale*I) of the basis dimension)
    std::vector<double> prior_mean;
    std::vector<std::vector<double>> prior_cov;
    double prior_scale = 1.0;
    // obstacles
    std::vector<ObstacleSpec> obstacles;
    double margin = 0.02;
    double smooth_beta = 50.0;
    // path and controls
    Vec2 start{0.2, 0.6};
    int n_t = 501;
    ControlBounds bounds;
    bool constant_speed = true;
    double init_theta0 = 0.0;
    double init_v = 0.1;
    double init_omega = 0.0;
    // objective
    std::string criterion = "A";
    double gamma = 0.1;
    RegularizationWeights reg_weights;
    bool minimize_log_det = false;
    // optimizer
    BarrierSettings barrier;
    // reduced-posterior workflow
    int reduced_dim = 25;
    int reduced_samples = 1000;
    SquaredExponentialPrior reduced_prior;
    // misc
    std::uint64_t seed = 0;
    int threads = 0;  // 0: OED_THREADS env or hardware default

    double dt() const { return T / (n_t - 1); }
    void validate() const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);
std::string dump_scenario(const ScenarioConfig& config);  // effective (defaults filled)

Grid2D build_grid(const ScenarioConfig& config);
VelocityField build_velocity(const ScenarioConfig& config);
InitialConditionBasis build_basis(const ScenarioConfig& config);
StateEnsemble build_scenario_ensemble(const ScenarioConfig& config, int threads);
ObstacleSet build_obstacles(const ScenarioConfig& config, const Grid2D& grid);
DesignProblem build_problem(const ScenarioConfig& config,
                            std::shared_ptr<const StateEnsemble> ensemble);
ControlVector initial_controls(const ScenarioConfig& config);

// ---- CSV exports (plot-ready; 17 significant digits) ----

void write_path_csv(const std::string& path, const SensorPath& sensor_path,
                    const ControlVector& controls);

struct PathCsv {
    SensorPath path;
    ControlVector controls;
};
PathCsv read_path_csv(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);
void write_gridsearch_csv(const std::string& path, const GridSearchResult& result);
void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& prior_lambda,
                        const Eigen::VectorXd& posterior_lambda);
void write_observations_csv(const std::string& path, const SensorPath& sensor_path,
                            const Eigen::MatrixXd& G);
void write_snr_csv(const std::string& path, const std::vector<double>& times,
                   const Eigen::VectorXd& db);
void write_convergence_csv(const std::string& path, const ConvergenceTable& table);

}  // namespace oed
