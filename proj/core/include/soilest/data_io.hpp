#pragma once

/**
 * @file data_io.hpp
 * @brief File formats, unit conversion and preprocessing of field records.
 *
 * All CSV files are UTF-8 with a header row, ',' separated and '.' as the
 * decimal mark. Numbers are written in the shortest form that parses back to
 * the identical double, so outputs are byte-reproducible.
 */

#include "soilest/ekf.hpp"
#include "soilest/grid.hpp"
#include "soilest/integrator.hpp"
#include "soilest/kriging.hpp"
#include "soilest/richards.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soilest {

// --- primitives -------------------------------------------------------------

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double value);
/// Strict parse of the whole field; throws ValidationError naming `what`.
[[nodiscard]] double parse_double(std::string_view text, std::string_view what);

/// Seconds since 1970-01-01T00:00:00Z. Accepts YYYY-MM-DD, and
/// YYYY-MM-DD[T| ]HH:MM[:SS[.fff]] optionally followed by Z or +HH:MM/-HH:MM.
/// Times without an offset are UTC. Throws ValidationError.
[[nodiscard]] double parse_iso8601(std::string_view text);
/// YYYY-MM-DDTHH:MM:SSZ (whole seconds).
[[nodiscard]] std::string format_iso8601(double epoch_s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based line number in the file of each row (for error messages).
    std::vector<std::size_t> lines;

    /// Throws ValidationError naming the missing column and the file.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] bool has_column(std::string_view name) const noexcept;
    std::string source;
};

/// Throws IoError if unreadable, ValidationError on ragged rows.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] CsvTable parse_csv(std::string_view text, std::string source = "<memory>");

/// Collects rows and writes them atomically (temporary file + rename).
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(std::vector<std::string> row);
    void add_row(std::span<const double> values);
    [[nodiscard]] std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes text to path via a temporary file in the same directory and an
/// atomic rename. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

// --- conversions ------------------------------------------------------------

/// Metres of water per kPa (rho = 1000 kg/m3, g = 9.80665 m/s2).
inline constexpr double kMetresPerKilopascal = 1.0 / 9.80665;

/// h = -tension / (rho g). Throws DomainError for negative or non-finite
/// tension.
[[nodiscard]] double tension_to_head(double tension_kpa);
[[nodiscard]] double head_to_tension(double head_m);

struct NormalizedSeries {
    std::vector<double> values;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> warnings;
};

/// (v - min) / (max - min). A constant (or single-element) series maps to
/// 0.5 with a warning. Reporting only: the filter works in physical units.
[[nodiscard]] NormalizedSeries minmax_normalize(std::span<const double> series);
[[nodiscard]] std::vector<double> minmax_denormalize(const NormalizedSeries& normalized);

// --- domain files -----------------------------------------------------------

/// Columns: x_m, y_m, depth_m, theta_s, theta_r, K_s_m_per_s, alpha_per_m, n.
/// Every bad row is reported in one ValidationError.
[[nodiscard]] std::vector<SoilSample> load_soil_samples(const std::filesystem::path& path);
void save_soil_samples(const std::filesystem::path& path, std::span<const SoilSample> samples);

struct WeatherRecord {
    double date_epoch_s = 0.0; ///< start of the day (UTC)
    double precipitation_mm = 0.0;
};

/// Columns: date, precipitation_mm.
[[nodiscard]] std::vector<WeatherRecord> load_weather(const std::filesystem::path& path);

/// Each day's total spread uniformly over that day, relative to
/// scenario_start_epoch_s. Days without rain produce no event.
[[nodiscard]] IrrigationSchedule rain_schedule(std::span<const WeatherRecord> weather, double scenario_start_epoch_s);

struct TensionRecord {
    double time_epoch_s = 0.0;
    std::string sensor_id;
    double tension_kpa = 0.0;
};

struct SensorMapEntry {
    Index node = 0;
    int depth_cm = 0;
};

/// sensor_id -> grid node and depth label.
struct SensorMap {
    std::map<std::string, SensorMapEntry> entries;
    [[nodiscard]] std::vector<Index> nodes() const;
};

/// Columns: sensor_id, node_index, depth_cm. Validates node range and that
/// the depth label falls in the node's layer.
[[nodiscard]] SensorMap load_sensor_map(const std::filesystem::path& path, const CylindricalGrid& grid);
void save_sensor_map(const std::filesystem::path& path, const SensorMap& map);
/// Throws ValidationError listing every inconsistent entry.
void validate_sensor_map(const SensorMap& map, const CylindricalGrid& grid);

struct MeasurementLog {
    std::vector<TensionRecord> records;
    /// Rows with a missing or unparsable value (dropped, not imputed).
    Index dropped_rows = 0;
    std::vector<std::string> warnings;
};

/// Columns: timestamp, sensor_id and one of tension_kpa or head_m. Heads
/// are converted to tension so that the log is uniform.
[[nodiscard]] MeasurementLog load_measurements(const std::filesystem::path& path);
/// Writes timestamp, sensor_id, head_m.
void save_measurements(const std::filesystem::path& path, std::span<const Observation> observations,
                       const SensorMap& map, double scenario_start_epoch_s);

struct ObservationSet {
    std::vector<Observation> observations;
    Index unknown_sensor = 0;
    std::vector<std::string> warnings;
};

/// Converts to heads, maps sensors to nodes and makes times relative to the
/// scenario start. Output is sorted by time, then node.
[[nodiscard]] ObservationSet to_observations(const MeasurementLog& log, const SensorMap& map,
                                             double scenario_start_epoch_s);

/// Columns: node_index, r_m, theta_rad, z_m, theta_s, theta_r, K_s_m_per_s,
/// alpha_per_m, n.
void save_parameter_field(const std::filesystem::path& path, const CylindricalGrid& grid, const ParameterField& field);
[[nodiscard]] ParameterField load_parameter_field(const std::filesystem::path& path, const CylindricalGrid& grid);

/// Wide format: time_s, <prefix>_0 ... <prefix>_{N-1}.
void save_trajectory(const std::filesystem::path& path, const Trajectory& trajectory, std::string_view prefix = "h");
[[nodiscard]] Trajectory load_trajectory(const std::filesystem::path& path);

/// Columns: node_index.
void save_layout(const std::filesystem::path& path, const SensorLayout& layout);
[[nodiscard]] SensorLayout load_layout(const std::filesystem::path& path, Index state_dimension);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes) noexcept;
[[nodiscard]] std::string hex_digest(std::uint64_t value);
/// FNV-1a of the file content; throws IoError.
[[nodiscard]] std::string file_digest(const std::filesystem::path& path);

} // namespace soilest
