#pragma once

/**
 * @file pipeline.hpp
 * @brief The file-based stages behind the command-line tool.
 *
 * Every stage reads files, writes files into an output directory and
 * finishes with manifest.json. Files are the only contract between stages.
 * Outputs are deterministic given the configuration and the seed.
 */

#include "soilest/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace soilest {

enum class TableFormat { csv, json };

/// Throws ValidationError for anything but "csv" or "json".
[[nodiscard]] TableFormat parse_table_format(std::string_view text);

struct CommandContext {
    Scenario scenario;
    std::filesystem::path config_path; ///< empty when defaults are used
    std::filesystem::path out_dir = ".";
    TableFormat format = TableFormat::csv;
    int jobs = 1;
    std::vector<std::string> argv;
};

/// Provenance of one command run, written atomically at the end.
class RunManifest {
public:
    RunManifest(std::string command, const CommandContext& ctx);

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void note(const std::string& key, const std::string& value);
    /// Writes <out_dir>/manifest.json.
    void write() const;

    [[nodiscard]] const std::vector<std::filesystem::path>& outputs() const noexcept { return outputs_; }

private:
    std::string command_;
    const CommandContext& ctx_;
    std::chrono::steady_clock::time_point started_;
    std::vector<std::filesystem::path> inputs_;
    std::vector<std::filesystem::path> outputs_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

struct InterpolateArgs {
    std::filesystem::path samples; ///< overrides the config's sample file
    bool check_exact = false;
};
struct InterpolateOutcome {
    /// Largest |prediction - sample| at the sample positions (when checked).
    std::optional<double> max_exactness_error;
    std::vector<std::string> warnings;
};
InterpolateOutcome cmd_interpolate(const CommandContext& ctx, const InterpolateArgs& args);

/// Truth trajectory (heads and water content), the initial state and the
/// parameter field used.
void cmd_simulate(const CommandContext& ctx);

struct PlaceSensorsArgs {
    std::filesystem::path trajectory;
    std::filesystem::path parameter_field; ///< empty: rebuild from the config
    std::optional<int> sensors;            ///< overrides observability.sensors
};
void cmd_place_sensors(const CommandContext& ctx, const PlaceSensorsArgs& args);

struct EstimateArgs {
    std::filesystem::path layout;
    /// Field readings (timestamp, sensor_id, tension_kpa|head_m); needs the
    /// config's sensor map.
    std::filesystem::path measurements;
    /// Truth trajectory to sample synthetic readings from (twin runs).
    std::filesystem::path truth;
    std::filesystem::path parameter_field;
    std::string label = "estimate";
};
void cmd_estimate(const CommandContext& ctx, const EstimateArgs& args);

struct EvaluateArgs {
    std::filesystem::path truth;
    /// One or more estimate trajectories; labels default to file stems.
    std::vector<std::filesystem::path> estimates;
    std::vector<std::string> labels;
    /// Nodes excluded from the metrics (the assimilated sensors when scoring
    /// against validation points).
    std::filesystem::path exclude_layout;
    std::filesystem::path parameter_field;
    /// Layer (iz) for the maps; default: surface.
    std::optional<int> layer;
};
void cmd_evaluate(const CommandContext& ctx, const EvaluateArgs& args);

struct TwinArgs {
    std::vector<Index> k_values = {2, 12};
};
/// The whole twin experiment in one stage: truth, ranking, top-k and
/// bottom-k assimilation, metrics, maps and the comparison table.
void cmd_twin(const CommandContext& ctx, const TwinArgs& args);

} // namespace soilest
