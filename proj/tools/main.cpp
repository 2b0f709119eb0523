// soilest: file-based pipeline for soil-moisture estimation under a pivot.
//
//   soilest simulate      --config c.json --out-dir run
//   soilest place-sensors --config c.json --trajectory run/truth_head.csv --out-dir run
//   soilest estimate      --config c.json --layout run/layout.csv --truth run/truth_head.csv --out-dir run
//   soilest evaluate      --config c.json --truth run/truth_head.csv --estimate run/estimate_head.csv --out-dir run
//   soilest twin          --config c.json --out-dir twin
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure,
// 1 anything else.

#include "soilest/error.hpp"
#include "soilest/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <regex>

namespace {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, other = 1, invalid = 2, numerical = 3, io = 4 };

struct GlobalFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out_dir = ".";
    std::string grid;
    std::string format = "csv";
};

void add_global_flags(CLI::App& app, GlobalFlags& g) {
    app.add_option("--config", g.config, "Scenario JSON (defaults are used when omitted)");
    app.add_option("--seed", g.seed, "Seed for every random stream (overrides the config)");
    app.add_option("--jobs", g.jobs, "Upper bound on worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "Directory for outputs and manifest.json");
    app.add_option("--grid", g.grid, "Grid override NRxNAZxNZ, e.g. 4x8x10");
    app.add_option("--format", g.format, "Metric and ranking table format")->check(CLI::IsMember({"csv", "json"}));
}

soilest::CommandContext make_context(const GlobalFlags& g, int argc, char** argv) {
    soilest::CommandContext ctx;
    if (!g.config.empty()) {
        ctx.config_path = g.config;
        ctx.scenario = soilest::load_scenario(g.config);
    }
    if (g.seed) ctx.scenario.seed = *g.seed;
    if (!g.grid.empty()) {
        static const std::regex pattern(R"((\d+)x(\d+)x(\d+))");
        std::smatch m;
        if (!std::regex_match(g.grid, m, pattern)) {
            throw soilest::ValidationError("--grid must look like 4x8x10, got '" + g.grid + "'");
        }
        ctx.scenario.grid.n_r = std::stoi(m[1]);
        ctx.scenario.grid.n_az = std::stoi(m[2]);
        ctx.scenario.grid.n_z = std::stoi(m[3]);
    }
    if (auto issues = soilest::validation_issues(ctx.scenario); !issues.empty()) {
        throw soilest::ValidationError(std::move(issues));
    }
    ctx.out_dir = g.out_dir;
    ctx.format = soilest::parse_table_format(g.format);
    ctx.jobs = g.jobs;
    ctx.argv.assign(argv, argv + argc);
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw soilest::IoError("cannot create " + ctx.out_dir.string() + ": " + ec.message());
    return ctx;
}

int report(const char* kind, const std::exception& e, int code) {
    std::cerr << "soilest: " << kind << ": " << e.what() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soil-moisture estimation: Kriging, Richards simulation, sensor placement and EKF"};
    app.require_subcommand(1);
    GlobalFlags g;

    auto* interpolate = app.add_subcommand("interpolate", "Krige soil samples onto the grid");
    soilest::InterpolateArgs ia;
    std::string samples;
    interpolate->add_option("--samples", samples, "Soil sample CSV (overrides the config)");
    interpolate->add_flag("--check-exact", ia.check_exact, "Re-predict at the samples and report the largest error");

    auto* simulate = app.add_subcommand("simulate", "Simulate the truth trajectory");

    auto* place = app.add_subcommand("place-sensors", "Rank nodes by observability and choose a layout");
    soilest::PlaceSensorsArgs pa;
    std::string p_traj, p_field;
    std::optional<int> p_k;
    place->add_option("--trajectory", p_traj, "Head trajectory CSV")->required();
    place->add_option("--parameter-field", p_field, "Parameter field CSV");
    place->add_option("-k,--sensors", p_k, "Number of sensors");

    auto* estimate = app.add_subcommand("estimate", "Run the extended Kalman filter");
    soilest::EstimateArgs ea;
    std::string e_layout, e_meas, e_truth, e_field;
    estimate->add_option("--layout", e_layout, "Sensor layout CSV");
    estimate->add_option("--measurements", e_meas, "Field readings CSV");
    estimate->add_option("--truth", e_truth, "Truth trajectory to sample synthetic readings from")
        ;
    estimate->add_option("--parameter-field", e_field, "Parameter field CSV");
    estimate->add_option("--label", ea.label, "Prefix of the output files");

    auto* evaluate = app.add_subcommand("evaluate", "Score estimates against a truth trajectory");
    soilest::EvaluateArgs va;
    std::string v_truth, v_exclude, v_field;
    std::vector<std::string> v_est;
    std::optional<int> v_layer;
    evaluate->add_option("--truth", v_truth, "Truth head trajectory CSV")->required();
    evaluate->add_option("--estimate", v_est, "Estimate head trajectory CSV (repeatable)")
        ->required()
        ;
    evaluate->add_option("--label", va.labels, "Label per estimate (repeatable)");
    evaluate->add_option("--layout", v_exclude, "Layout whose nodes are excluded from the metrics")
        ;
    evaluate->add_option("--parameter-field", v_field, "Parameter field CSV");
    evaluate->add_option("--layer", v_layer, "Layer index for the maps (default: surface)");

    auto* twin = app.add_subcommand("twin", "Full twin experiment: top-k versus bottom-k layouts");
    soilest::TwinArgs ta;
    std::vector<long> t_k;
    twin->add_option("-k,--sensors", t_k, "Sensor counts (repeatable; default 2 and 12)");

    for (auto* sub : {interpolate, simulate, place, estimate, evaluate, twin}) add_global_flags(*sub, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ExitCode::ok : ExitCode::invalid;
    }

    try {
        const soilest::CommandContext ctx = make_context(g, argc, argv);
        if (*interpolate) {
            ia.samples = samples;
            const auto out = soilest::cmd_interpolate(ctx, ia);
            for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
            if (out.max_exactness_error) {
                std::cout << "max exactness error: " << *out.max_exactness_error << '\n';
            }
        } else if (*simulate) {
            soilest::cmd_simulate(ctx);
        } else if (*place) {
            pa.trajectory = p_traj;
            pa.parameter_field = p_field;
            pa.sensors = p_k;
            soilest::cmd_place_sensors(ctx, pa);
        } else if (*estimate) {
            ea.layout = e_layout;
            ea.measurements = e_meas.empty() && e_truth.empty() ? ctx.scenario.measurements_csv : e_meas;
            ea.truth = e_truth;
            ea.parameter_field = e_field;
            soilest::cmd_estimate(ctx, ea);
        } else if (*evaluate) {
            va.truth = v_truth;
            va.estimates.assign(v_est.begin(), v_est.end());
            va.exclude_layout = v_exclude;
            va.parameter_field = v_field;
            va.layer = v_layer;
            soilest::cmd_evaluate(ctx, va);
        } else if (*twin) {
            if (!t_k.empty()) ta.k_values.assign(t_k.begin(), t_k.end());
            soilest::cmd_twin(ctx, ta);
        }
        std::cout << "wrote " << fs::path(g.out_dir) / "manifest.json" << '\n';
        return ExitCode::ok;
    } catch (const soilest::ValidationError& e) {
        return report("invalid input", e, ExitCode::invalid);
    } catch (const soilest::DomainError& e) {
        return report("invalid input", e, ExitCode::invalid);
    } catch (const soilest::IndexError& e) {
        return report("invalid input", e, ExitCode::invalid);
    } catch (const soilest::NumericalError& e) {
        return report("numerical failure", e, ExitCode::numerical);
    } catch (const soilest::IoError& e) {
        return report("I/O failure", e, ExitCode::io);
    } catch (const std::exception& e) {
        return report("error", e, ExitCode::other);
    }
}
