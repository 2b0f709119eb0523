#include "soilest/twin.hpp"

#include "soilest/data_io.hpp"
#include "soilest/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace soilest {

namespace {

SoilParameters blend(const SoilParameters& a, const SoilParameters& b, double w) {
    auto lin = [w](double x, double y) { return (1.0 - w) * x + w * y; };
    auto geo = [w](double x, double y) { return std::exp((1.0 - w) * std::log(x) + w * std::log(y)); };
    return {lin(a.theta_s, b.theta_s), lin(a.theta_r, b.theta_r), geo(a.K_s, b.K_s), geo(a.alpha, b.alpha),
            lin(a.n, b.n)};
}

} // namespace

std::vector<SoilSample> synthetic_samples(int count, double radius_m, double depth_m, std::mt19937_64& rng) {
    if (count < 1) {
        throw ValidationError("synthetic sample count must be >= 1");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::array<double, 3> bands = {0.2 * depth_m, 0.5 * depth_m, 0.8 * depth_m};

    std::vector<Point3> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double r = radius_m * std::sqrt(unit(rng));
        const double th = 2.0 * std::numbers::pi * unit(rng);
        pts.push_back({r * std::cos(th), r * std::sin(th), bands[static_cast<std::size_t>(i % 3)]});
    }
    const KrigingGeometry geometry;
    const double range = 30.0;
    Eigen::MatrixXd cov(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            cov(i, j) = std::exp(-geometry.distance(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) /
                                 range);
        }
        cov(i, i) += 1e-9;
    }
    const Eigen::MatrixXd l = cov.llt().matrixL();
    Eigen::VectorXd z(count);
    for (int i = 0; i < count; ++i) {
        z(i) = normal(rng);
    }
    const Eigen::VectorXd latent = l * z;

    std::vector<SoilSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const Point3& p = pts[static_cast<std::size_t>(i)];
        const double trend = 0.6 - 1.2 * p.depth / depth_m; // coarser near the surface
        const double t = 0.5 * std::erfc(-(latent(i) + trend) / std::numbers::sqrt2);
        const SoilParameters params =
            t < 0.5 ? blend(clay_loam(), loam(), 2.0 * t) : blend(loam(), sandy_loam(), 2.0 * t - 1.0);
        out.push_back({p, params});
    }
    return out;
}

FieldBuild build_parameter_field(const Scenario& s) {
    const CylindricalGrid grid = s.grid.build();
    FieldBuild out;
    if (!s.soil.parameter_field_csv.empty()) {
        out.field = load_parameter_field(s.soil.parameter_field_csv, grid);
        return out;
    }
    if (!s.soil.samples_csv.empty()) {
        out.samples = load_soil_samples(s.soil.samples_csv);
    } else {
        auto rng = make_rng(s.seed, rng_stream::samples);
        out.samples = synthetic_samples(s.soil.synthetic_samples, s.grid.radius_m, s.grid.depth_m, rng);
    }
    VariogramFitOptions fit;
    fit.kind = s.soil.variogram;
    fit.lag_bins = s.soil.lag_bins;
    fit.max_lag_fraction = s.soil.max_lag_fraction;
    fit.fit_nugget = s.soil.fit_nugget;
    fit.geometry.anisotropy_ratio = s.soil.anisotropy_ratio;
    out.models = fit_parameter_models(out.samples, fit);
    KrigedField kf = krige_field(out.samples, grid, *out.models, fit.geometry);
    out.field = std::move(kf.field);
    out.warnings = std::move(kf.warnings);
    return out;
}

std::shared_ptr<RichardsModel> build_model(const Scenario& s, ParameterField field) {
    BoundaryConditions bc;
    bc.bottom = s.model.bottom;
    return std::make_shared<RichardsModel>(s.grid.build(), std::move(field), bc, build_forcing(s), nullptr,
                                           build_model_options(s));
}

Eigen::VectorXd initial_truth(const Scenario& s, Index n) {
    auto rng = make_rng(s.seed, rng_stream::initial_truth);
    std::uniform_real_distribution<double> u(s.simulation.initial_min_m, s.simulation.initial_max_m);
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) {
        x(i) = u(rng);
    }
    return x;
}

Eigen::VectorXd initial_estimate(const Scenario& s, const Eigen::VectorXd& truth) {
    if (s.filter.initial == InitialGuess::mismatch) {
        return (1.0 + s.filter.initial_mismatch) * truth;
    }
    auto rng = make_rng(s.seed, rng_stream::initial_guess);
    std::uniform_real_distribution<double> u(s.filter.guess_min_m, s.filter.guess_max_m);
    Eigen::VectorXd x(truth.size());
    for (Index i = 0; i < x.size(); ++i) {
        x(i) = u(rng);
    }
    return x;
}

std::vector<Observation> synthetic_observations(const Trajectory& truth, std::span<const Index> nodes,
                                                double noise_std, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, noise_std);
    std::vector<Index> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Observation> out;
    out.reserve(truth.states.size() * sorted.size());
    for (std::size_t k = 0; k < truth.states.size(); ++k) {
        for (Index node : sorted) {
            const double e = noise_std > 0.0 ? noise(rng) : 0.0;
            out.push_back({truth.times[k], node, truth.states[k](node) + e});
        }
    }
    return out;
}

TwinCase run_twin_case(const Scenario& s, const RichardsModel& model, const Trajectory& truth,
                       const Eigen::VectorXd& x0_hat, const SensorSelection& selection,
                       std::span<const Observation> all_observations, std::string label) {
    TwinCase c;
    c.label = std::move(label);
    c.k = selection.layout.size();
    c.selection = selection;

    std::vector<Observation> obs;
    for (const Observation& o : all_observations) {
        if (selection.layout.position_of(o.node) >= 0) {
            obs.push_back(o);
        }
    }
    // Non-owning handle: the dynamics object lives only for this call.
    const RichardsDynamics dynamics(std::shared_ptr<const RichardsModel>(&model, [](const RichardsModel*) {}),
                                    build_step_options(s));
    FilterState fs = make_filter_state(x0_hat, s.filter.sigma0_m, s.filter.process_std, s.filter.measurement_std,
                                       selection.layout.size());
    AssimilationOptions opt;
    opt.t0_s = truth.times.front();
    opt.horizon_s = truth.times.back() - truth.times.front();
    opt.dt_s = s.simulation.dt_s;
    opt.filter = build_filter_options(s);
    opt.keep_covariance_diagonal = false;
    c.result = run_assimilation(dynamics, std::move(fs), obs, selection.layout, opt);

    c.head = metric_series(truth, c.result.estimate);
    c.nrmse_head = nrmse(c.head);
    c.theta = metric_series(water_content_trajectory(model, truth), water_content_trajectory(model, c.result.estimate));
    c.nrmse_theta = nrmse(c.theta);
    c.half_time_s = time_to_fraction(c.head, 0.5);
    return c;
}

TwinExperiment run_twin_experiment(const Scenario& s, std::span<const Index> k_values) {
    TwinExperiment ex;
    ex.grid = s.grid.build();
    ex.field = build_parameter_field(s);
    ex.model = build_model(s, ex.field.field);

    const Eigen::VectorXd x0 = initial_truth(s, ex.grid.size());
    SimulationOptions sim;
    sim.horizon_s = horizon_seconds(s);
    sim.dt_out_s = s.simulation.dt_s;
    sim.process_noise_std = s.simulation.process_noise_std;
    sim.step = build_step_options(s);
    auto process_rng = make_rng(s.seed, rng_stream::process_noise);
    ex.truth = simulate(*ex.model, x0, 0.0, sim, &process_rng);
    ex.truth_theta = water_content_trajectory(*ex.model, ex.truth);

    RankOptions rank;
    rank.snapshot_stride = s.observability.snapshot_stride;
    ex.report = rank_nodes(*ex.model, ex.truth, s.simulation.dt_s, rank);

    ex.initial_estimate = initial_estimate(s, x0);
    std::vector<Index> all(static_cast<std::size_t>(ex.grid.size()));
    std::iota(all.begin(), all.end(), Index{0});
    auto noise_rng = make_rng(s.seed, rng_stream::measurement_noise);
    const std::vector<Observation> observations =
        synthetic_observations(ex.truth, all, s.filter.measurement_std, noise_rng);

    ex.open_loop = run_twin_case(s, *ex.model, ex.truth, ex.initial_estimate, SensorSelection{SensorLayout({}, ex.grid.size()), 0.0},
                                 {}, "open_loop");
    for (Index k : k_values) {
        ex.cases.push_back(run_twin_case(s, *ex.model, ex.truth, ex.initial_estimate, select_sensors(ex.report, k),
                                         observations, "top_" + std::to_string(k)));
        ex.cases.push_back(run_twin_case(s, *ex.model, ex.truth, ex.initial_estimate, select_lowest(ex.report, k),
                                         observations, "bottom_" + std::to_string(k)));
    }
    return ex;
}

} // namespace soilest
