#include "oedpath/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "oedpath/field_io.hpp"

namespace oed {

using nlohmann::json;

namespace {

// get<T>(section, key): typed read with the config field named in errors.
template <typename T>
T get(const json& j, const std::string& section, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field " + section + "." + key + " has the wrong type");
    }
}

Vec2 get_vec2(const json& j, const std::string& section, const std::string& key, Vec2 fallback) {
    if (!j.contains(key)) return fallback;
    const auto arr = get<std::vector<double>>(j, section, key, {});
    if (arr.size() != 2) {
        throw ConfigError("config field " + section + "." + key + " must be [x, y]");
    }
    return {arr[0], arr[1]};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    Grid2D grid = build_grid(*this);
    grid.validate();
    if (!(T > 0.0) || !(ds > 0.0) || !(kappa > 0.0)) {
        throw ConfigError("config fields forward.T, forward.ds, forward.kappa must be > 0");
    }
    if (n_t < 2) throw ConfigError("config field path.n_t must be >= 2");
    if ((n_t - 1) * dt() > T * (1.0 + 1e-12)) {
        throw ConfigError("config field path.n_t inconsistent with forward.T");
    }
    bounds.validate();
    if (velocity_kind == "file" && velocity_file.empty()) {
        throw ConfigError("config field velocity.path required for kind 'file'");
    }
    if (basis_kind == "file" && basis_file.empty()) {
        throw ConfigError("config field basis.path required for kind 'file'");
    }
    if (basis_kind != "file" && basis_kind != "two_source") {
        throw ConfigError("config field basis.kind must be 'two_source' or 'file'");
    }
    if (criterion != "A" && criterion != "D") {
        throw ConfigError("config field objective.criterion must be 'A' or 'D'");
    }
    parse_kernel_kind(kernel_kind);
    if (!grid.contains(start)) {
        throw ConfigError("config field path.start lies outside the grid");
    }
    for (const auto& o : obstacles) {
        if (o.type != "ellipsoid" && o.type != "rectangle") {
            throw ConfigError("config field obstacles.items[].type must be 'ellipsoid' or "
                              "'rectangle'");
        }
    }
}

ScenarioConfig parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ScenarioConfig c;
    const json empty = json::object();
    const json& grid = j.contains("grid") ? j.at("grid") : empty;
    c.nx = get(grid, "grid", "nx", c.nx);
    c.ny = get(grid, "grid", "ny", c.ny);
    c.x0 = get(grid, "grid", "x0", c.x0);
    c.y0 = get(grid, "grid", "y0", c.y0);
    c.x1 = get(grid, "grid", "x1", c.x1);
    c.y1 = get(grid, "grid", "y1", c.y1);

    const json& vel = j.contains("velocity") ? j.at("velocity") : empty;
    c.velocity_kind = get<std::string>(vel, "velocity", "kind", c.velocity_kind);
    c.velocity_strength = get(vel, "velocity", "strength", c.velocity_strength);
    c.velocity_file = get<std::string>(vel, "velocity", "path", c.velocity_file);

    const json& fwd = j.contains("forward") ? j.at("forward") : empty;
    c.kappa = get(fwd, "forward", "kappa", c.kappa);
    c.T = get(fwd, "forward", "T", c.T);
    c.ds = get(fwd, "forward", "ds", c.ds);
    c.store_stride = get(fwd, "forward", "store_stride", c.store_stride);

    const json& basis = j.contains("basis") ? j.at("basis") : empty;
    c.basis_kind = get<std::string>(basis, "basis", "kind", c.basis_kind);
    c.source1 = get_vec2(basis, "basis", "source1", c.source1);
    c.source2 = get_vec2(basis, "basis", "source2", c.source2);
    c.source_cap = get(basis, "basis", "cap", c.source_cap);
    c.source_width = get(basis, "basis", "width", c.source_width);
    c.basis_file = get<std::string>(basis, "basis", "path", c.basis_file);

    const json& kern = j.contains("kernel") ? j.at("kernel") : empty;
    c.kernel_kind = get<std::string>(kern, "kernel", "kind", c.kernel_kind);
    c.kernel_sigma = get(kern, "kernel", "sigma", c.kernel_sigma);
    c.kernel_radius = get(kern, "kernel", "radius", c.kernel_radius);
    c.kernel_quad = get(kern, "kernel", "n_quad", c.kernel_quad);

    const json& noise = j.contains("noise") ? j.at("noise") : empty;
    c.noise_diffusion = get(noise, "noise", "a_diffusion", c.noise_diffusion);
    c.noise_reaction = get(noise, "noise", "a_reaction", c.noise_reaction);

    const json& prior = j.contains("prior") ? j.at("prior") : empty;
    c.prior_mean = get<std::vector<double>>(prior, "prior", "mean", c.prior_mean);
    c.prior_cov = get<std::vector<std::vector<double>>>(prior, "prior", "covariance",
                                                        c.prior_cov);
    c.prior_scale = get(prior, "prior", "scale", c.prior_scale);

    const json& obs = j.contains("obstacles") ? j.at("obstacles") : empty;
    c.margin = get(obs, "obstacles", "margin", c.margin);
    c.smooth_beta = get(obs, "obstacles", "smooth_beta", c.smooth_beta);
    if (obs.contains("items")) {
        for (const auto& item : obs.at("items")) {
            ObstacleSpec spec;
            spec.type = get<std::string>(item, "obstacles.items[]", "type", "");
            spec.center = get_vec2(item, "obstacles.items[]", "center", spec.center);
            spec.a = get(item, "obstacles.items[]", "a", spec.a);
            spec.b = get(item, "obstacles.items[]", "b", spec.b);
            spec.angle = get(item, "obstacles.items[]", "angle", spec.angle);
            c.obstacles.push_back(spec);
        }
    }

    const json& path = j.contains("path") ? j.at("path") : empty;
    c.start = get_vec2(path, "path", "start", c.start);
    c.n_t = get(path, "path", "n_t", c.n_t);
    {
        const auto vb = get<std::vector<double>>(path, "path", "v_bounds",
                                                 {c.bounds.v_lo, c.bounds.v_hi});
        const auto wb = get<std::vector<double>>(path, "path", "omega_bounds",
                                                 {c.bounds.omega_lo, c.bounds.omega_hi});
        if (vb.size() != 2 || wb.size() != 2) {
            throw ConfigError("config fields path.v_bounds and path.omega_bounds must be "
                              "[lo, hi]");
        }
        c.bounds.v_lo = vb[0];
        c.bounds.v_hi = vb[1];
        c.bounds.omega_lo = wb[0];
        c.bounds.omega_hi = wb[1];
    }
    c.constant_speed = get(path, "path", "constant_speed", c.constant_speed);
    c.init_theta0 = get(path, "path", "init_theta0", c.init_theta0);
    c.init_v = get(path, "path", "init_v", c.init_v);
    c.init_omega = get(path, "path", "init_omega", c.init_omega);

    const json& obj = j.contains("objective") ? j.at("objective") : empty;
    c.criterion = get<std::string>(obj, "objective", "criterion", c.criterion);
    c.gamma = get(obj, "objective", "gamma", c.gamma);
    c.reg_weights.w_v = get(obj, "objective", "w_v", c.reg_weights.w_v);
    c.reg_weights.w_omega = get(obj, "objective", "w_omega", c.reg_weights.w_omega);
    c.reg_weights.w_jump = get(obj, "objective", "w_jump", c.reg_weights.w_jump);
    c.minimize_log_det = get(obj, "objective", "minimize_log_det", c.minimize_log_det);

    const json& opt = j.contains("optimizer") ? j.at("optimizer") : empty;
    c.barrier.mu0 = get(opt, "optimizer", "mu0", c.barrier.mu0);
    c.barrier.mu_shrink = get(opt, "optimizer", "mu_shrink", c.barrier.mu_shrink);
    c.barrier.mu_min = get(opt, "optimizer", "mu_min", c.barrier.mu_min);
    c.barrier.max_outer = get(opt, "optimizer", "max_outer", c.barrier.max_outer);
    c.barrier.max_inner = get(opt, "optimizer", "max_inner", c.barrier.max_inner);
    c.barrier.max_total_inner =
        get(opt, "optimizer", "max_total_inner", c.barrier.max_total_inner);
    c.barrier.lbfgs_memory = get(opt, "optimizer", "lbfgs_memory", c.barrier.lbfgs_memory);
    {
        const std::string mode = get<std::string>(
            opt, "optimizer", "stationarity",
            c.barrier.stationarity_mode == StationarityMode::barrier_free ? "barrier_free"
                                                                          : "barrier_gradient");
        if (mode == "barrier_free") {
            c.barrier.stationarity_mode = StationarityMode::barrier_free;
        } else if (mode == "barrier_gradient") {
            c.barrier.stationarity_mode = StationarityMode::barrier_gradient;
        } else {
            throw ConfigError("config field optimizer.stationarity must be 'barrier_free' or "
                              "'barrier_gradient'");
        }
    }

    const json& red = j.contains("reduced") ? j.at("reduced") : empty;
    c.reduced_dim = get(red, "reduced", "dim", c.reduced_dim);
    c.reduced_samples = get(red, "reduced", "samples", c.reduced_samples);
    c.reduced_prior.variance = get(red, "reduced", "variance", c.reduced_prior.variance);
    c.reduced_prior.length_scale =
        get(red, "reduced", "length_scale", c.reduced_prior.length_scale);
    c.reduced_prior.sample_grid =
        get(red, "reduced", "sample_grid", c.reduced_prior.sample_grid);

    c.seed = get<std::uint64_t>(j, "", "seed", c.seed);
    c.threads = get(j, "", "threads", c.threads);

    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

std::string dump_scenario(const ScenarioConfig& c) {
    json j;
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}, {"x0", c.x0}, {"y0", c.y0},
                 {"x1", c.x1}, {"y1", c.y1}};
    j["velocity"] = {{"kind", c.velocity_kind}, {"strength", c.velocity_strength}};
    if (!c.velocity_file.empty()) j["velocity"]["path"] = c.velocity_file;
    j["forward"] = {{"kappa", c.kappa}, {"T", c.T}, {"ds", c.ds},
                    {"store_stride", c.store_stride}};
    j["basis"] = {{"kind", c.basis_kind},
                  {"source1", {c.source1.x(), c.source1.y()}},
                  {"source2", {c.source2.x(), c.source2.y()}},
                  {"cap", c.source_cap},
                  {"width", c.source_width}};
    if (!c.basis_file.empty()) j["basis"]["path"] = c.basis_file;
    j["kernel"] = {{"kind", c.kernel_kind}, {"sigma", c.kernel_sigma},
                   {"radius", c.kernel_radius}, {"n_quad", c.kernel_quad}};
    j["noise"] = {{"a_diffusion", c.noise_diffusion}, {"a_reaction", c.noise_reaction}};
    j["prior"] = {{"scale", c.prior_scale}};
    if (!c.prior_mean.empty()) j["prior"]["mean"] = c.prior_mean;
    if (!c.prior_cov.empty()) j["prior"]["covariance"] = c.prior_cov;
    j["obstacles"] = {{"margin", c.margin}, {"smooth_beta", c.smooth_beta}};
    j["obstacles"]["items"] = json::array();
    for (const auto& o : c.obstacles) {
        j["obstacles"]["items"].push_back({{"type", o.type},
                                           {"center", {o.center.x(), o.center.y()}},
                                           {"a", o.a},
                                           {"b", o.b},
                                           {"angle", o.angle}});
    }
    j["path"] = {{"start", {c.start.x(), c.start.y()}},
                 {"n_t", c.n_t},
                 {"v_bounds", {c.bounds.v_lo, c.bounds.v_hi}},
                 {"omega_bounds", {c.bounds.omega_lo, c.bounds.omega_hi}},
                 {"constant_speed", c.constant_speed},
                 {"init_theta0", c.init_theta0},
                 {"init_v", c.init_v},
                 {"init_omega", c.init_omega}};
    j["objective"] = {{"criterion", c.criterion},
                      {"gamma", c.gamma},
                      {"w_v", c.reg_weights.w_v},
                      {"w_omega", c.reg_weights.w_omega},
                      {"w_jump", c.reg_weights.w_jump},
                      {"minimize_log_det", c.minimize_log_det}};
    j["optimizer"] = {
        {"mu0", c.barrier.mu0},
        {"mu_shrink", c.barrier.mu_shrink},
        {"mu_min", c.barrier.mu_min},
        {"max_outer", c.barrier.max_outer},
        {"max_inner", c.barrier.max_inner},
        {"max_total_inner", c.barrier.max_total_inner},
        {"lbfgs_memory", c.barrier.lbfgs_memory},
        {"stationarity", c.barrier.stationarity_mode == StationarityMode::barrier_free
                             ? "barrier_free"
                             : "barrier_gradient"}};
    j["reduced"] = {{"dim", c.reduced_dim},
                    {"samples", c.reduced_samples},
                    {"variance", c.reduced_prior.variance},
                    {"length_scale", c.reduced_prior.length_scale},
                    {"sample_grid", c.reduced_prior.sample_grid}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j.dump(2);
}

Grid2D build_grid(const ScenarioConfig& c) {
    Grid2D g;
    g.nx = c.nx;
    g.ny = c.ny;
    g.x0 = c.x0;
    g.y0 = c.y0;
    if (c.nx >= 2) g.dx = (c.x1 - c.x0) / (c.nx - 1);
    if (c.ny >= 2) g.dy = (c.y1 - c.y0) / (c.ny - 1);
    return g;
}

VelocityField build_velocity(const ScenarioConfig& c) {
    const Grid2D grid = build_grid(c);
    if (c.velocity_kind == "file") {
        VelocityField vel = velocity_from_field_file(read_field_file(c.velocity_file));
        if (!(vel.grid == grid)) {
            throw ConfigError("velocity file grid does not match config field grid");
        }
        return vel;
    }
    return builtin_velocity(grid, parse_builtin_velocity(c.velocity_kind), c.velocity_strength);
}

InitialConditionBasis build_basis(const ScenarioConfig& c) {
    if (c.basis_kind == "two_source") {
        return two_source_basis(c.source1, c.source2, c.source_cap, c.source_width);
    }
    const FieldFile file = read_field_file(c.basis_file);
    if (file.n_frames != 1) throw ConfigError("basis file must have n_frames = 1");
    std::vector<std::vector<double>> fields(file.n_components);
    const std::size_t nodes = static_cast<std::size_t>(file.grid.num_nodes());
    for (int m = 0; m < file.n_components; ++m) {
        fields[m].assign(file.component(0, m), file.component(0, m) + nodes);
    }
    return field_basis(std::move(fields));
}

StateEnsemble build_scenario_ensemble(const ScenarioConfig& c, int threads) {
    ForwardOptions opt;
    opt.kappa = c.kappa;
    opt.T = c.T;
    opt.ds = c.ds;
    opt.store_stride = c.store_stride;
    return build_ensemble(build_velocity(c), build_basis(c), opt, threads);
}

ObstacleSet build_obstacles(const ScenarioConfig& c, const Grid2D& grid) {
    ObstacleSet obs = ObstacleSet::for_domain(grid, c.margin);
    obs.smooth_beta = c.smooth_beta;
    for (const auto& spec : c.obstacles) {
        if (spec.type == "ellipsoid") {
            obs.ellipsoids.push_back(
                EllipsoidObstacle::from_axes(spec.center, spec.a, spec.b, spec.angle));
        } else {
            obs.rectangles.push_back(
                RectangleObstacle::from_extents(spec.center, spec.a, spec.b, spec.angle));
        }
    }
    obs.validate();
    return obs;
}

DesignProblem build_problem(const ScenarioConfig& c,
                            std::shared_ptr<const StateEnsemble> ensemble) {
    DesignProblem p;
    p.ensemble = std::move(ensemble);
    MeasurementKernel kernel;
    switch (parse_kernel_kind(c.kernel_kind)) {
        case KernelKind::pointwise: kernel = MeasurementKernel::pointwise(); break;
        case KernelKind::gaussian: kernel = MeasurementKernel::gaussian(c.kernel_sigma); break;
        case KernelKind::uniform_ball:
            kernel = MeasurementKernel::uniform_ball(c.kernel_radius, c.kernel_quad);
            break;
    }
    p.kernel = kernel;
    p.n_t = c.n_t;
    p.dt = c.dt();
    p.noise = build_noise_precision(c.n_t, p.dt, c.noise_diffusion, c.noise_reaction);

    const int M = p.ensemble->M;
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(M, 1.0);
    if (!c.prior_mean.empty()) {
        if (static_cast<int>(c.prior_mean.size()) != M) {
            throw ConfigError("config field prior.mean has wrong dimension");
        }
        mean = Eigen::Map<const Eigen::VectorXd>(c.prior_mean.data(), M);
    }
    Eigen::MatrixXd cov = c.prior_scale * Eigen::MatrixXd::Identity(M, M);
    if (!c.prior_cov.empty()) {
        if (static_cast<int>(c.prior_cov.size()) != M) {
            throw ConfigError("config field prior.covariance has wrong dimension");
        }
        for (int i = 0; i < M; ++i) {
            if (static_cast<int>(c.prior_cov[i].size()) != M) {
                throw ConfigError("config field prior.covariance must be square");
            }
            for (int k = 0; k < M; ++k) cov(i, k) = c.prior_cov[i][k];
        }
    }
    p.prior = GaussianPrior::make(mean, cov);
    p.obstacles = build_obstacles(c, p.ensemble->grid);
    p.start = c.start;
    p.criterion = c.criterion == "A" ? Criterion::A : Criterion::D;
    p.gamma = c.gamma;
    p.reg_weights = c.reg_weights;
    p.bounds = c.bounds;
    p.minimize_log_det = c.minimize_log_det;
    p.validate();
    return p;
}

ControlVector initial_controls(const ScenarioConfig& c) {
    return ControlVector::constant(c.start, c.init_theta0, c.init_v, c.init_omega, c.n_t - 1,
                                   c.constant_speed);
}

void write_path_csv(const std::string& path, const SensorPath& sensor_path,
                    const ControlVector& controls) {
    const int n_t = sensor_path.n_t();
    controls.validate(n_t);
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "t,p_x,p_y,theta,v,omega\n";
    for (int k = 0; k < n_t; ++k) {
        const int step = std::min(k, n_t - 2);  // last row repeats the final controls
        os << fmt(sensor_path.times[k]) << ',' << fmt(sensor_path.positions[k].x()) << ','
           << fmt(sensor_path.positions[k].y()) << ',' << fmt(sensor_path.headings[k]) << ','
           << fmt(controls.speed(step)) << ',' << fmt(controls.omega[step]) << '\n';
    }
    if (!os) throw ConfigError("write failed: " + path);
}

PathCsv read_path_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open path CSV: " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty path CSV: " + path);

    PathCsv out;
    std::vector<double> v_all, w_all;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw ConfigError("path CSV row with " + std::to_string(fields.size()) +
                              " fields (expected 6): " + path);
        }
        out.path.times.push_back(std::stod(fields[0]));
        out.path.positions.emplace_back(std::stod(fields[1]), std::stod(fields[2]));
        out.path.headings.push_back(std::stod(fields[3]));
        v_all.push_back(std::stod(fields[4]));
        w_all.push_back(std::stod(fields[5]));
    }
    const int n_t = out.path.n_t();
    if (n_t < 2) throw ConfigError("path CSV needs at least two rows: " + path);

    out.controls.x0 = out.path.positions[0];
    out.controls.theta0 = out.path.headings[0];
    out.controls.omega.assign(w_all.begin(), w_all.end() - 1);
    const bool all_equal =
        std::all_of(v_all.begin(), v_all.end(), [&](double x) { return x == v_all[0]; });
    if (all_equal) {
        out.controls.constant_speed = true;
        out.controls.v = {v_all[0]};
    } else {
        out.controls.constant_speed = false;
        out.controls.v.assign(v_all.begin(), v_all.end() - 1);
    }
    return out;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "iter,mu,total,utility,regularization,stationarity,min_margin\n";
    for (const auto& row : history) {
        os << row.iter << ',' << fmt(row.mu) << ',' << fmt(row.total) << ','
           << fmt(row.utility) << ',' << fmt(row.regularization) << ','
           << fmt(row.stationarity) << ',' << fmt(row.min_margin) << '\n';
    }
}

void write_gridsearch_csv(const std::string& path, const GridSearchResult& result) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "theta0,omega0,psi_a,psi_d,feasible\n";
    for (std::size_t it = 0; it < result.theta_values.size(); ++it) {
        for (std::size_t iw = 0; iw < result.omega_values.size(); ++iw) {
            const bool ok = result.feasible(it, iw);
            os << fmt(result.theta_values[it]) << ',' << fmt(result.omega_values[iw]) << ','
               << (ok ? fmt(result.psi_a(it, iw)) : "nan") << ','
               << (ok ? fmt(result.psi_d(it, iw)) : "nan") << ',' << (ok ? 1 : 0) << '\n';
        }
    }
}

void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& prior_lambda,
                        const Eigen::VectorXd& posterior_lambda) {
    if (prior_lambda.size() != posterior_lambda.size()) {
        throw ConfigError("write_spectrum_csv: spectra have different lengths");
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "index,prior_lambda,posterior_lambda\n";
    for (Eigen::Index i = 0; i < prior_lambda.size(); ++i) {
        os << (i + 1) << ',' << fmt(prior_lambda[i]) << ',' << fmt(posterior_lambda[i]) << '\n';
    }
}

void write_observations_csv(const std::string& path, const SensorPath& sensor_path,
                            const Eigen::MatrixXd& G) {
    if (G.rows() != sensor_path.n_t()) {
        throw ConfigError("write_observations_csv: G rows do not match the path");
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "t,p_x,p_y";
    for (Eigen::Index m = 0; m < G.cols(); ++m) os << ",g" << (m + 1);
    os << '\n';
    for (int k = 0; k < sensor_path.n_t(); ++k) {
        os << fmt(sensor_path.times[k]) << ',' << fmt(sensor_path.positions[k].x()) << ','
           << fmt(sensor_path.positions[k].y());
        for (Eigen::Index m = 0; m < G.cols(); ++m) os << ',' << fmt(G(k, m));
        os << '\n';
    }
}

void write_snr_csv(const std::string& path, const std::vector<double>& times,
                   const Eigen::VectorXd& db) {
    if (static_cast<Eigen::Index>(times.size()) != db.size()) {
        throw ConfigError("write_snr_csv: size mismatch");
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "t,snr_db\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        os << fmt(times[k]) << ',' << fmt(db[static_cast<Eigen::Index>(k)]) << '\n';
    }
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& table) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "dt,n_t,psi_a,grad_norm,error,grad_error\n";
    for (const auto& row : table.rows) {
        os << fmt(row.dt) << ',' << row.n_t << ',' << fmt(row.psi_a) << ','
           << fmt(row.grad_norm) << ',' << fmt(row.error) << ',' << fmt(row.grad_error) << '\n';
    }
}

}  // namespace oed
