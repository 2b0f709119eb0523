#include "soilest/pipeline.hpp"

#include "soilest/data_io.hpp"
#include "soilest/error.hpp"
#include "soilest/evaluation.hpp"
#include "soilest/observability.hpp"
#include "soilest/twin.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#ifndef SOILEST_VERSION
#define SOILEST_VERSION "unknown"
#endif

namespace soilest {

namespace fs = std::filesystem;
using nlohmann::json;

TableFormat parse_table_format(std::string_view text) {
    if (text == "csv") return TableFormat::csv;
    if (text == "json") return TableFormat::json;
    throw ValidationError("--format must be csv or json, got '" + std::string(text) + "'");
}

// --- manifest ---------------------------------------------------------------

RunManifest::RunManifest(std::string command, const CommandContext& ctx)
    : command_(std::move(command)), ctx_(ctx), started_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const fs::path& path) {
    if (!path.empty()) inputs_.push_back(path);
}

void RunManifest::add_output(const fs::path& path) { outputs_.push_back(path); }

void RunManifest::note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

void RunManifest::write() const {
    json j;
    j["command"] = command_;
    j["argv"] = ctx_.argv;
    j["config_path"] = ctx_.config_path.string();
    j["config_hash"] = scenario_hash(ctx_.scenario);
    j["config"] = to_json(ctx_.scenario);
    j["seed"] = ctx_.scenario.seed;
    j["jobs"] = ctx_.jobs;
    j["format"] = ctx_.format == TableFormat::csv ? "csv" : "json";
    j["versions"] = {{"soilest", SOILEST_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    auto files = [](const std::vector<fs::path>& paths) {
        json arr = json::array();
        for (const auto& p : paths) {
            std::error_code ec;
            const auto size = fs::file_size(p, ec);
            arr.push_back({{"path", p.string()},
                           {"fnv1a64", file_digest(p)},
                           {"bytes", ec ? 0 : static_cast<std::uintmax_t>(size)}});
        }
        return arr;
    };
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    json notes = json::object();
    for (const auto& [k, v] : notes_) notes[k] = v;
    j["notes"] = notes;
    j["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    write_file_atomic(ctx_.out_dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

/// A table written as CSV or as a JSON array of row objects.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw DomainError("table row width mismatch");
        rows_.push_back(std::move(row));
    }
    void add(std::span<const double> values) {
        std::vector<std::string> row;
        for (double v : values) row.push_back(format_double(v));
        add(std::move(row));
    }
    fs::path write(const CommandContext& ctx, const std::string& stem, RunManifest& manifest) const {
        fs::path path;
        if (ctx.format == TableFormat::csv) {
            path = ctx.out_dir / (stem + ".csv");
            CsvWriter w(header_);
            for (const auto& r : rows_) w.add_row(r);
            w.write(path);
        } else {
            path = ctx.out_dir / (stem + ".json");
            json arr = json::array();
            for (const auto& r : rows_) {
                json obj = json::object();
                for (std::size_t c = 0; c < header_.size(); ++c) {
                    try {
                        obj[header_[c]] = parse_double(r[c], header_[c]);
                    } catch (const ValidationError&) {
                        obj[header_[c]] = r[c];
                    }
                }
                arr.push_back(std::move(obj));
            }
            write_file_atomic(path, arr.dump(1) + "\n");
        }
        manifest.add_output(path);
        return path;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

fs::path write_json(const CommandContext& ctx, const std::string& name, const json& j, RunManifest& manifest) {
    const fs::path path = ctx.out_dir / name;
    write_file_atomic(path, j.dump(2) + "\n");
    manifest.add_output(path);
    return path;
}

fs::path write_trajectory(const CommandContext& ctx, const std::string& name, const Trajectory& t,
                          std::string_view prefix, RunManifest& manifest) {
    const fs::path path = ctx.out_dir / name;
    save_trajectory(path, t, prefix);
    manifest.add_output(path);
    return path;
}

void add_config_inputs(const CommandContext& ctx, RunManifest& m) {
    m.add_input(ctx.config_path);
    const Scenario& s = ctx.scenario;
    for (const auto* p : {&s.soil.samples_csv, &s.soil.parameter_field_csv, &s.forcing.weather_csv, &s.sensor_map_csv}) {
        m.add_input(*p);
    }
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

/// Parameter field from an explicit file or rebuilt from the configuration.
ParameterField resolve_field(const CommandContext& ctx, const fs::path& file, RunManifest& m,
                             std::vector<std::string>& warnings) {
    if (!file.empty()) {
        m.add_input(file);
        return load_parameter_field(file, ctx.scenario.grid.build());
    }
    FieldBuild fb = build_parameter_field(ctx.scenario);
    warnings.insert(warnings.end(), fb.warnings.begin(), fb.warnings.end());
    return std::move(fb.field);
}

void check_trajectory(const Trajectory& t, const CylindricalGrid& grid, const fs::path& path) {
    if (t.states.empty()) {
        throw ValidationError(path.string() + ": trajectory has no rows");
    }
    if (t.states.front().size() != grid.size()) {
        throw ValidationError(path.string() + ": " + std::to_string(t.states.front().size()) +
                              " state columns for a grid of " + std::to_string(grid.size()) + " nodes");
    }
}

Table observability_table(const ObservabilityReport& r, const CylindricalGrid& grid) {
    Table t({"node_index", "r_m", "theta_rad", "z_m", "o_avg"});
    for (Index i = 0; i < grid.size(); ++i) {
        const NodePosition p = grid.position(i);
        const std::array<double, 5> row = {static_cast<double>(i), p.r, p.theta, p.z, r.average(i)};
        t.add(row);
    }
    return t;
}

json selection_json(const SensorSelection& s) {
    return {{"nodes", s.layout.nodes()}, {"group_sum", s.group_sum}};
}

Table metric_table(const MetricSeries& m) {
    Table t({"time_s", "rmse"});
    for (std::size_t k = 0; k < m.rmse.size(); ++k) {
        const std::array<double, 2> row = {m.times[k], m.rmse[k]};
        t.add(row);
    }
    return t;
}

json metric_json(const MetricSeries& m) {
    json j = {{"average_rmse", m.average_rmse}, {"reference_mean", m.reference_mean}, {"instants", m.instants}};
    try {
        j["nrmse"] = nrmse(m);
    } catch (const DomainError&) {
        j["nrmse"] = nullptr;
    }
    const auto half = time_to_fraction(m, 0.5);
    j["time_to_half_initial_rmse_s"] = half ? json(*half) : json(nullptr);
    return j;
}

void write_maps(const CommandContext& ctx, const std::string& label, const CylindricalGrid& grid,
                const ParameterField& field, const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate, int layer,
                RunManifest& manifest) {
    const ErrorMap em = error_map(actual, estimate, grid, field, layer);
    const std::array<std::pair<const char*, const Eigen::VectorXd*>, 4> maps = {
        {{"error", &em.error}, {"abs_error", &em.absolute_error}, {"theta_actual", &em.theta_actual},
         {"theta_estimate", &em.theta_estimate}}};
    for (const auto& [name, values] : maps) {
        const fs::path path = ctx.out_dir / ("map_" + label + "_" + name + ".csv");
        save_map(path, grid, em.nodes, *values);
        manifest.add_output(path);
    }
}

Table innovation_table(const AssimilationResult& r) {
    Table t({"time_s", "node_index", "innovation_m", "variance_m2"});
    for (const auto& rec : r.innovations) {
        const std::array<double, 4> row = {rec.time_s, static_cast<double>(rec.node), rec.innovation, rec.variance};
        t.add(row);
    }
    return t;
}

json assimilation_json(const AssimilationResult& r, const Scenario& s) {
    return {{"updates", r.updates},
            {"assimilated_readings", r.assimilated},
            {"rejected_implausible", r.rejected_implausible},
            {"dropped_duplicates", r.dropped_duplicates},
            {"dropped_outside_horizon", r.dropped_outside_horizon},
            {"transition", std::string(to_string(s.filter.transition))},
            {"joseph", s.filter.joseph},
            {"sigma0_m", s.filter.sigma0_m},
            {"process_std", s.filter.process_std},
            {"measurement_std", s.filter.measurement_std}};
}

SimulationOptions simulation_options(const Scenario& s) {
    SimulationOptions sim;
    sim.horizon_s = horizon_seconds(s);
    sim.dt_out_s = s.simulation.dt_s;
    sim.process_noise_std = s.simulation.process_noise_std;
    sim.step = build_step_options(s);
    return sim;
}

} // namespace

// --- interpolate ------------------------------------------------------------

InterpolateOutcome cmd_interpolate(const CommandContext& ctx, const InterpolateArgs& args) {
    RunManifest manifest("interpolate", ctx);
    add_config_inputs(ctx, manifest);
    Scenario s = ctx.scenario;
    if (!args.samples.empty()) {
        s.soil.samples_csv = args.samples.string();
        s.soil.parameter_field_csv.clear();
        manifest.add_input(args.samples);
    }
    const CylindricalGrid grid = s.grid.build();
    FieldBuild fb = build_parameter_field(s);
    InterpolateOutcome out;
    out.warnings = fb.warnings;

    const fs::path field_path = ctx.out_dir / "parameter_field.csv";
    save_parameter_field(field_path, grid, fb.field);
    manifest.add_output(field_path);
    if (s.soil.samples_csv.empty() && !fb.samples.empty()) {
        const fs::path sp = ctx.out_dir / "samples.csv";
        save_soil_samples(sp, fb.samples);
        manifest.add_output(sp);
    }

    const std::vector<Index> surface = grid.layer_nodes(grid.n_z() - 1);
    for (SoilParameterId id : all_soil_parameters) {
        Eigen::VectorXd v(static_cast<Index>(surface.size()));
        for (std::size_t k = 0; k < surface.size(); ++k) {
            v(static_cast<Index>(k)) = get_parameter(fb.field[static_cast<std::size_t>(surface[k])], id);
        }
        const fs::path p = ctx.out_dir / ("surface_" + std::string(parameter_name(id)) + ".csv");
        save_map(p, grid, surface, v);
        manifest.add_output(p);
    }

    json summary;
    summary["warnings"] = warnings_json(out.warnings);
    if (fb.models) {
        json models = json::object();
        for (SoilParameterId id : all_soil_parameters) {
            const VariogramModel& m = (*fb.models)[static_cast<std::size_t>(id)];
            models[std::string(parameter_name(id))] = {{"kind", std::string(to_string(m.kind))},
                                                       {"nugget", m.nugget},
                                                       {"sill", m.sill},
                                                       {"range_m", m.range},
                                                       {"space", id == SoilParameterId::K_s ? "ln" : "linear"}};
        }
        summary["variograms"] = models;
        summary["anisotropy_ratio"] = s.soil.anisotropy_ratio;
        summary["samples"] = fb.samples.size();
    }
    if (args.check_exact && fb.models) {
        // Re-predict at every sample position with the fitted models.
        double worst = 0.0;
        std::vector<Point3> pts;
        for (const auto& smp : fb.samples) pts.push_back(smp.position);
        KrigingGeometry geometry;
        geometry.anisotropy_ratio = s.soil.anisotropy_ratio;
        for (SoilParameterId id : all_soil_parameters) {
            std::vector<double> values;
            for (const auto& smp : fb.samples) values.push_back(to_kriging_space(id, get_parameter(smp.params, id)));
            const OrdinaryKriging ok(pts, values, (*fb.models)[static_cast<std::size_t>(id)], geometry);
            for (std::size_t k = 0; k < pts.size(); ++k) {
                worst = std::max(worst, std::abs(ok.predict(pts[k]) - values[k]));
            }
        }
        out.max_exactness_error = worst;
        summary["max_exactness_error"] = worst;
    }
    write_json(ctx, "interpolation.json", summary, manifest);
    manifest.write();
    return out;
}

// --- simulate ---------------------------------------------------------------

void cmd_simulate(const CommandContext& ctx) {
    RunManifest manifest("simulate", ctx);
    add_config_inputs(ctx, manifest);
    const Scenario& s = ctx.scenario;
    std::vector<std::string> warnings;
    const CylindricalGrid grid = s.grid.build();
    ParameterField field = resolve_field(ctx, {}, manifest, warnings);
    const fs::path field_path = ctx.out_dir / "parameter_field.csv";
    save_parameter_field(field_path, grid, field);
    manifest.add_output(field_path);

    const auto model = build_model(s, std::move(field));
    const Eigen::VectorXd x0 = initial_truth(s, grid.size());
    auto rng = make_rng(s.seed, rng_stream::process_noise);
    const Trajectory truth = simulate(*model, x0, 0.0, simulation_options(s), &rng);
    write_trajectory(ctx, "truth_head.csv", truth, "h", manifest);
    write_trajectory(ctx, "truth_theta.csv", water_content_trajectory(*model, truth), "theta", manifest);

    json summary = {{"nodes", grid.size()},
                    {"instants", truth.states.size()},
                    {"dt_s", s.simulation.dt_s},
                    {"horizon_s", horizon_seconds(s)},
                    {"total_water_start_m3", model->total_water(truth.states.front())},
                    {"total_water_end_m3", model->total_water(truth.states.back())},
                    {"warnings", warnings}};
    write_json(ctx, "simulation.json", summary, manifest);
    manifest.write();
}

// --- place-sensors ----------------------------------------------------------

void cmd_place_sensors(const CommandContext& ctx, const PlaceSensorsArgs& args) {
    RunManifest manifest("place-sensors", ctx);
    add_config_inputs(ctx, manifest);
    const Scenario& s = ctx.scenario;
    const CylindricalGrid grid = s.grid.build();
    if (args.trajectory.empty()) {
        throw ValidationError("place-sensors needs --trajectory");
    }
    manifest.add_input(args.trajectory);
    const Trajectory traj = load_trajectory(args.trajectory);
    check_trajectory(traj, grid, args.trajectory);
    std::vector<std::string> warnings;
    const auto model = build_model(s, resolve_field(ctx, args.parameter_field, manifest, warnings));

    RankOptions rank;
    rank.snapshot_stride = s.observability.snapshot_stride;
    rank.jobs = ctx.jobs;
    if (s.observability.candidates_from_sensor_map) {
        rank.candidates = load_sensor_map(s.sensor_map_csv, grid).nodes();
    }
    const double period = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : s.simulation.dt_s;
    const ObservabilityReport report = rank_nodes(*model, traj, period, rank);
    warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());

    const int k = args.sensors.value_or(s.observability.sensors);
    const SensorSelection top = select_sensors(report, k);
    const SensorSelection bottom = select_lowest(report, k);

    observability_table(report, grid).write(ctx, "observability", manifest);
    Table ranking({"rank", "node_index", "o_avg"});
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
        const Index node = report.ranking[r];
        const std::array<double, 3> row = {static_cast<double>(r + 1), static_cast<double>(node), report.average(node)};
        ranking.add(row);
    }
    ranking.write(ctx, "ranking", manifest);
    for (const auto& [name, sel] : {std::pair{"layout.csv", &top}, std::pair{"layout_bottom.csv", &bottom}}) {
        const fs::path p = ctx.out_dir / name;
        save_layout(p, sel->layout);
        manifest.add_output(p);
    }
    json summary = {{"sensors", k},
                    {"candidates", report.candidates.size()},
                    {"snapshots", report.snapshots.size()},
                    {"snapshot_stride", s.observability.snapshot_stride},
                    {"sampling_period_s", period},
                    {"top", selection_json(top)},
                    {"bottom", selection_json(bottom)},
                    {"group_measure", "sum of the selected nodes' time-averaged modal degree"},
                    {"trajectory_source", "open-loop simulated trajectory"},
                    {"warnings", warnings}};
    write_json(ctx, "observability_summary.json", summary, manifest);
    manifest.write();
}

// --- estimate ---------------------------------------------------------------

void cmd_estimate(const CommandContext& ctx, const EstimateArgs& args) {
    RunManifest manifest("estimate", ctx);
    add_config_inputs(ctx, manifest);
    const Scenario& s = ctx.scenario;
    const CylindricalGrid grid = s.grid.build();
    if (!args.measurements.empty() && !args.truth.empty()) {
        throw ValidationError("estimate takes either --measurements or --truth, not both");
    }
    std::vector<std::string> warnings;
    const auto model = build_model(s, resolve_field(ctx, args.parameter_field, manifest, warnings));

    SensorLayout layout({}, grid.size());
    if (!args.layout.empty()) {
        manifest.add_input(args.layout);
        layout = load_layout(args.layout, grid.size());
    }

    std::vector<Observation> observations;
    Eigen::VectorXd x0_hat;
    json source;
    if (!args.truth.empty()) {
        manifest.add_input(args.truth);
        const Trajectory truth = load_trajectory(args.truth);
        check_trajectory(truth, grid, args.truth);
        auto rng = make_rng(s.seed, rng_stream::measurement_noise);
        std::vector<Index> all(static_cast<std::size_t>(grid.size()));
        std::iota(all.begin(), all.end(), Index{0});
        // Noise drawn for every node so that any two layouts see the same
        // realisation at shared nodes.
        for (const Observation& o : synthetic_observations(truth, all, s.filter.measurement_std, rng)) {
            if (layout.position_of(o.node) >= 0) observations.push_back(o);
        }
        x0_hat = initial_estimate(s, truth.states.front());
        source = {{"kind", "synthetic"}, {"truth", args.truth.string()}};
    } else if (!args.measurements.empty()) {
        if (s.sensor_map_csv.empty()) {
            throw ValidationError("field measurements need sensor_map_csv in the configuration");
        }
        manifest.add_input(args.measurements);
        const SensorMap map = load_sensor_map(s.sensor_map_csv, grid);
        const MeasurementLog log = load_measurements(args.measurements);
        ObservationSet set = to_observations(log, map, scenario_start_epoch(s));
        warnings.insert(warnings.end(), log.warnings.begin(), log.warnings.end());
        warnings.insert(warnings.end(), set.warnings.begin(), set.warnings.end());
        Index not_in_layout = 0;
        for (const Observation& o : set.observations) {
            if (layout.position_of(o.node) >= 0) observations.push_back(o);
            else ++not_in_layout;
        }
        if (not_in_layout > 0) {
            warnings.push_back(std::to_string(not_in_layout) + " readings at nodes outside the layout kept for validation only");
        }
        x0_hat = initial_estimate(s, initial_truth(s, grid.size()));
        source = {{"kind", "field"}, {"measurements", args.measurements.string()}, {"dropped_rows", log.dropped_rows}};
    } else {
        x0_hat = initial_estimate(s, initial_truth(s, grid.size()));
        source = {{"kind", "none (open loop)"}};
    }

    const RichardsDynamics dynamics(model, build_step_options(s));
    FilterState fs =
        make_filter_state(x0_hat, s.filter.sigma0_m, s.filter.process_std, s.filter.measurement_std, layout.size());
    AssimilationOptions opt;
    opt.horizon_s = horizon_seconds(s);
    opt.dt_s = s.simulation.dt_s;
    opt.filter = build_filter_options(s);
    const AssimilationResult result = run_assimilation(dynamics, std::move(fs), observations, layout, opt);

    write_trajectory(ctx, args.label + "_head.csv", result.estimate, "h", manifest);
    write_trajectory(ctx, args.label + "_theta.csv", water_content_trajectory(*model, result.estimate), "theta",
                     manifest);
    Trajectory pdiag;
    pdiag.times = result.estimate.times;
    pdiag.states = result.covariance_diagonal;
    write_trajectory(ctx, args.label + "_covariance_diagonal.csv", pdiag, "p", manifest);
    innovation_table(result).write(ctx, args.label + "_innovations", manifest);

    json summary = assimilation_json(result, s);
    summary["source"] = source;
    summary["layout"] = layout.nodes();
    summary["warnings"] = warnings;
    write_json(ctx, args.label + "_summary.json", summary, manifest);
    manifest.write();
}

// --- evaluate ---------------------------------------------------------------

void cmd_evaluate(const CommandContext& ctx, const EvaluateArgs& args) {
    RunManifest manifest("evaluate", ctx);
    add_config_inputs(ctx, manifest);
    const Scenario& s = ctx.scenario;
    const CylindricalGrid grid = s.grid.build();
    if (args.truth.empty() || args.estimates.empty()) {
        throw ValidationError("evaluate needs --truth and at least one --estimate");
    }
    manifest.add_input(args.truth);
    const Trajectory truth = load_trajectory(args.truth);
    check_trajectory(truth, grid, args.truth);
    std::vector<std::string> warnings;
    const ParameterField field = resolve_field(ctx, args.parameter_field, manifest, warnings);
    const auto model = build_model(s, field);

    std::vector<Index> subset;
    if (!args.exclude_layout.empty()) {
        manifest.add_input(args.exclude_layout);
        const SensorLayout excluded = load_layout(args.exclude_layout, grid.size());
        for (Index i = 0; i < grid.size(); ++i) {
            if (excluded.position_of(i) < 0) subset.push_back(i);
        }
    }
    const int layer = args.layer.value_or(grid.n_z() - 1);
    if (layer < 0 || layer >= grid.n_z()) {
        throw ValidationError("--layer must be in [0, " + std::to_string(grid.n_z()) + ")");
    }
    const Trajectory truth_theta = water_content_trajectory(*model, truth);

    json summary = json::object();
    Table comparison({"case", "average_rmse_head_m", "nrmse_head", "average_rmse_theta", "nrmse_theta",
                      "time_to_half_rmse_s"});
    std::set<std::string> used_labels;
    for (std::size_t e = 0; e < args.estimates.size(); ++e) {
        const fs::path& path = args.estimates[e];
        const std::string label = e < args.labels.size() ? args.labels[e] : path.stem().string();
        if (!used_labels.insert(label).second) {
            throw ValidationError("duplicate estimate label '" + label + "'");
        }
        manifest.add_input(path);
        const Trajectory est = load_trajectory(path);
        check_trajectory(est, grid, path);
        const MetricSeries head = metric_series(truth, est, subset);
        const MetricSeries theta = metric_series(truth_theta, water_content_trajectory(*model, est), subset);
        metric_table(head).write(ctx, "metrics_" + label + "_head", manifest);
        metric_table(theta).write(ctx, "metrics_" + label + "_theta", manifest);
        write_maps(ctx, label, grid, field, truth.states.back(), est.states.back(), layer, manifest);
        summary[label] = {{"head", metric_json(head)}, {"theta", metric_json(theta)}};
        const auto half = time_to_fraction(head, 0.5);
        comparison.add(std::vector<std::string>{label, format_double(head.average_rmse), format_double(nrmse(head)),
                                                format_double(theta.average_rmse), format_double(nrmse(theta)),
                                                half ? format_double(*half) : std::string("never")});
    }
    comparison.write(ctx, "comparison", manifest);
    json out = {{"cases", summary},
                {"map_layer", layer},
                {"metric_nodes", subset.empty() ? json("all") : json(subset.size())},
                {"warnings", warnings}};
    write_json(ctx, "evaluation.json", out, manifest);
    manifest.write();
}

// --- twin -------------------------------------------------------------------

void cmd_twin(const CommandContext& ctx, const TwinArgs& args) {
    RunManifest manifest("twin", ctx);
    add_config_inputs(ctx, manifest);
    const Scenario& s = ctx.scenario;
    const TwinExperiment ex = run_twin_experiment(s, args.k_values);
    const CylindricalGrid& grid = ex.grid;

    const fs::path field_path = ctx.out_dir / "parameter_field.csv";
    save_parameter_field(field_path, grid, ex.field.field);
    manifest.add_output(field_path);
    write_trajectory(ctx, "truth_head.csv", ex.truth, "h", manifest);
    write_trajectory(ctx, "truth_theta.csv", ex.truth_theta, "theta", manifest);
    observability_table(ex.report, grid).write(ctx, "observability", manifest);

    Table comparison({"case", "sensors", "group_sum", "average_rmse_head_m", "nrmse_head", "average_rmse_theta",
                      "nrmse_theta", "time_to_half_rmse_s"});
    json cases = json::object();
    std::vector<const TwinCase*> all{&ex.open_loop};
    for (const auto& c : ex.cases) all.push_back(&c);
    for (const TwinCase* c : all) {
        write_trajectory(ctx, "estimate_" + c->label + "_head.csv", c->result.estimate, "h", manifest);
        metric_table(c->head).write(ctx, "metrics_" + c->label + "_head", manifest);
        metric_table(c->theta).write(ctx, "metrics_" + c->label + "_theta", manifest);
        write_maps(ctx, c->label, grid, ex.field.field, ex.truth.states.back(), c->result.estimate.states.back(),
                   grid.n_z() - 1, manifest);
        if (c->k > 0) {
            const fs::path p = ctx.out_dir / ("layout_" + c->label + ".csv");
            save_layout(p, c->selection.layout);
            manifest.add_output(p);
        }
        comparison.add(std::vector<std::string>{
            c->label, std::to_string(c->k), format_double(c->selection.group_sum), format_double(c->head.average_rmse),
            format_double(c->nrmse_head), format_double(c->theta.average_rmse), format_double(c->nrmse_theta),
            c->half_time_s ? format_double(*c->half_time_s) : std::string("never")});
        json cj = {{"head", metric_json(c->head)},
                   {"theta", metric_json(c->theta)},
                   {"selection", selection_json(c->selection)},
                   {"assimilation", assimilation_json(c->result, s)}};
        cases[c->label] = cj;
    }
    comparison.write(ctx, "comparison", manifest);
    json summary = {{"cases", cases},
                    {"k_values", args.k_values},
                    {"snapshots", ex.report.snapshots.size()},
                    {"warnings", ex.field.warnings}};
    write_json(ctx, "twin.json", summary, manifest);
    manifest.write();
}

} // namespace soilest
