#pragma once

/**
 * @file scenario.hpp
 * @brief Run configuration: schema, defaults, validation and persistence.
 *
 * A scenario is one JSON document with nested sections. Every key is
 * optional; missing keys take the defaults below (the simulated-data study:
 * 6 x 40 x 22 grid, 3.6 mm/day for the first 8 h of each day, 6 days at
 * 12-minute steps, noise standard deviations 1e-6 and 6e-2, 20 % initial
 * mismatch). Unknown keys are rejected so that typos do not silently fall
 * back to defaults.
 */

#include "soilest/ekf.hpp"
#include "soilest/grid.hpp"
#include "soilest/kriging.hpp"
#include "soilest/richards.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace soilest {

struct GridConfig {
    int n_r = 6;
    int n_az = 40;
    int n_z = 22;
    double radius_m = 50.0;
    double depth_m = 0.75;

    [[nodiscard]] CylindricalGrid build() const { return {n_r, n_az, n_z, radius_m, depth_m}; }
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

/// One dated application (e.g. a row of the season's irrigation log).
struct IrrigationEntry {
    std::string date; ///< ISO-8601 day
    double amount_mm = 0.0;
    double start_hour = 0.0;
    double duration_h = 8.0;
    friend bool operator==(const IrrigationEntry&, const IrrigationEntry&) = default;
};

/// The same flux every day for the whole horizon.
struct DailyIrrigation {
    double rate_mm_per_day = 3.6;
    double start_hour = 0.0;
    double duration_h = 8.0;
    friend bool operator==(const DailyIrrigation&, const DailyIrrigation&) = default;
};

struct PivotConfig {
    bool enabled = false;
    double angular_speed_rad_per_s = PivotSweep{}.angular_speed_rad_per_s;
    double sector_width_rad = PivotSweep{}.sector_width_rad;
    double start_angle_rad = 0.0;
    friend bool operator==(const PivotConfig&, const PivotConfig&) = default;
};

struct ForcingConfig {
    std::string start = "2019-06-19T00:00:00Z";
    std::optional<DailyIrrigation> daily = DailyIrrigation{};
    std::vector<IrrigationEntry> events;
    PivotConfig pivot;
    std::string weather_csv;
    double evaporation_mm_per_day = 0.0;
    friend bool operator==(const ForcingConfig&, const ForcingConfig&) = default;
};

struct SoilConfig {
    /// Sample file to krige; empty means a seeded synthetic sample set.
    std::string samples_csv;
    /// Per-node parameter file; when set, Kriging is skipped.
    std::string parameter_field_csv;
    int synthetic_samples = 60;
    VariogramKind variogram = VariogramKind::exponential;
    int lag_bins = 10;
    double max_lag_fraction = 0.5;
    bool fit_nugget = false;
    double anisotropy_ratio = 1.0 / 20.0;
    friend bool operator==(const SoilConfig&, const SoilConfig&) = default;
};

struct ModelConfig {
    BottomBoundary bottom = BottomBoundary::free_drainage;
    ConductivityMean conductivity_mean = ConductivityMean::arithmetic;
    double capacity_floor = 1e-7;
    double max_substep_s = 180.0;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct SimulationConfig {
    double horizon_days = 6.0;
    double dt_s = 720.0;
    double process_noise_std = 1e-6;
    /// Truth initial heads are uniform in [min, max].
    double initial_min_m = -0.95;
    double initial_max_m = -0.8;
    friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

enum class InitialGuess { mismatch, uniform };

struct FilterConfig {
    double sigma0_m = 1e3;
    double process_std = 1e-6;
    double measurement_std = 6e-2;
    /// mismatch: x0_hat = (1 + initial_mismatch) x0_true (twin runs).
    /// uniform: x0_hat uniform in [guess_min_m, guess_max_m] (field data).
    InitialGuess initial = InitialGuess::mismatch;
    double initial_mismatch = 0.2;
    double guess_min_m = -6.0;
    double guess_max_m = -5.0;
    TransitionMode transition = TransitionMode::exponential;
    bool joseph = false;
    double plausible_min_m = -100.0;
    double plausible_max_m = 0.1;
    friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

struct ObservabilityConfig {
    int sensors = 12;
    /// Use every stride-th trajectory state as an operating point.
    int snapshot_stride = 5;
    /// Restrict candidates to the nodes of the sensor map (field setting).
    bool candidates_from_sensor_map = false;
    friend bool operator==(const ObservabilityConfig&, const ObservabilityConfig&) = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    GridConfig grid;
    SoilConfig soil;
    ForcingConfig forcing;
    ModelConfig model;
    SimulationConfig simulation;
    FilterConfig filter;
    ObservabilityConfig observability;
    std::string sensor_map_csv;
    std::string measurements_csv;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Every problem found, not only the first. Does not touch the file system.
[[nodiscard]] std::vector<std::string> validation_issues(const Scenario& s);

[[nodiscard]] nlohmann::json to_json(const Scenario& s);
/// Throws ValidationError listing unknown keys, wrong types and invariant
/// violations.
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j);

/// Parses and validates; relative file paths are resolved against the
/// config's directory. A sensor map, if given, is loaded and checked against
/// the grid. Throws IoError / ValidationError.
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const Scenario& s);

/// Canonical serialisation (sorted keys, round-trip numbers).
[[nodiscard]] std::string canonical_json(const Scenario& s);
/// FNV-1a of the canonical serialisation, hex.
[[nodiscard]] std::string scenario_hash(const Scenario& s);

/// The season's irrigation log (mm per date, each applied over 8 h).
[[nodiscard]] std::vector<IrrigationEntry> season_irrigation_log();

/// Start of the scenario [s since epoch].
[[nodiscard]] double scenario_start_epoch(const Scenario& s);
[[nodiscard]] double horizon_seconds(const Scenario& s);

/// Irrigation, rain and evaporation as model forcing (relative time).
[[nodiscard]] Forcing build_forcing(const Scenario& s);
[[nodiscard]] ModelOptions build_model_options(const Scenario& s);
[[nodiscard]] StepOptions build_step_options(const Scenario& s);
[[nodiscard]] FilterOptions build_filter_options(const Scenario& s);

/// Independent generator for one named purpose, derived from the single
/// scenario seed.
[[nodiscard]] std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

namespace rng_stream {
inline constexpr std::uint64_t samples = 1;
inline constexpr std::uint64_t initial_truth = 2;
inline constexpr std::uint64_t process_noise = 3;
inline constexpr std::uint64_t measurement_noise = 4;
inline constexpr std::uint64_t initial_guess = 5;
} // namespace rng_stream

[[nodiscard]] std::string_view to_string(BottomBoundary b) noexcept;
[[nodiscard]] std::string_view to_string(ConductivityMean m) noexcept;
[[nodiscard]] std::string_view to_string(TransitionMode m) noexcept;
[[nodiscard]] std::string_view to_string(InitialGuess g) noexcept;

} // namespace soilest
