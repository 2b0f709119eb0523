#include "soilest/data_io.hpp"

#include "soilest/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <tuple>

namespace soilest {

namespace fs = std::filesystem;

// --- primitives -------------------------------------------------------------

std::string format_double(double value) {
    if (value == 0.0) {
        return "0"; // also folds -0 so that outputs do not depend on its sign
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

double parse_double(std::string_view text, std::string_view what) {
    const std::string_view t = trim(text);
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (t.empty() || res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError(std::string(what) + ": '" + std::string(t) + "' is not a number");
    }
    return value;
}

namespace {

int parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view original) {
    if (pos + len > s.size()) {
        throw ValidationError("timestamp '" + std::string(original) + "' is truncated");
    }
    int v = 0;
    const auto res = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (res.ec != std::errc{} || res.ptr != s.data() + pos + len) {
        throw ValidationError("timestamp '" + std::string(original) + "' is malformed");
    }
    return v;
}

void expect_char(std::string_view s, std::size_t pos, char c, std::string_view original) {
    if (pos >= s.size() || s[pos] != c) {
        throw ValidationError("timestamp '" + std::string(original) + "' is malformed");
    }
}

} // namespace

double parse_iso8601(std::string_view text) {
    const std::string_view s = trim(text);
    const int year = parse_fixed_int(s, 0, 4, text);
    expect_char(s, 4, '-', text);
    const unsigned month = static_cast<unsigned>(parse_fixed_int(s, 5, 2, text));
    expect_char(s, 7, '-', text);
    const unsigned day = static_cast<unsigned>(parse_fixed_int(s, 8, 2, text));
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ValidationError("timestamp '" + std::string(text) + "' is not a valid date");
    }
    double seconds = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count()) * 86400.0;
    std::size_t pos = 10;
    if (pos == s.size()) {
        return seconds;
    }
    if (s[pos] != 'T' && s[pos] != ' ') {
        throw ValidationError("timestamp '" + std::string(text) + "' is malformed");
    }
    const int hour = parse_fixed_int(s, pos + 1, 2, text);
    expect_char(s, pos + 3, ':', text);
    const int minute = parse_fixed_int(s, pos + 4, 2, text);
    pos += 6;
    double sec = 0.0;
    if (pos < s.size() && s[pos] == ':') {
        sec = parse_fixed_int(s, pos + 1, 2, text);
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            std::size_t end = pos + 1;
            while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
            sec += parse_double(s.substr(pos, end - pos), "timestamp fraction");
            pos = end;
        }
    }
    if (hour > 23 || minute > 59 || sec >= 61.0) {
        throw ValidationError("timestamp '" + std::string(text) + "' has an invalid time of day");
    }
    seconds += hour * 3600.0 + minute * 60.0 + sec;
    if (pos == s.size() || (s[pos] == 'Z' && pos + 1 == s.size())) {
        return seconds;
    }
    if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6) {
        const int oh = parse_fixed_int(s, pos + 1, 2, text);
        expect_char(s, pos + 3, ':', text);
        const int om = parse_fixed_int(s, pos + 4, 2, text);
        const double offset = oh * 3600.0 + om * 60.0;
        return s[pos] == '+' ? seconds - offset : seconds + offset;
    }
    throw ValidationError("timestamp '" + std::string(text) + "' has an invalid zone designator");
}

std::string format_iso8601(double epoch_s) {
    const auto total = static_cast<long long>(std::floor(epoch_s));
    const auto days = static_cast<long long>(std::floor(static_cast<double>(total) / 86400.0));
    const long long rem = total - days * 86400;
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600,
                  (rem / 60) % 60, rem % 60);
    return buf;
}

// --- CSV --------------------------------------------------------------------

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ValidationError(source + ": missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const noexcept {
    return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

} // namespace

CsvTable parse_csv(std::string_view text, std::string source) {
    CsvTable table;
    table.source = std::move(source);
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
        static_cast<unsigned char>(text[2]) == 0xBF) {
        text.remove_prefix(3);
    }
    std::vector<std::string> issues;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (trim(line).empty() || trim(line).front() == '#') {
            continue;
        }
        auto fields = split_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            issues.push_back(table.source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
            continue;
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (!have_header) {
        issues.push_back(table.source + ": empty file (header row required)");
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    return table;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading " + path.string());
    }
    return ss.str();
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("error writing " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) {
        throw DomainError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                          std::to_string(header_.size()));
    }
    rows_.push_back(std::move(row));
}

void CsvWriter::add_row(std::span<const double> values) {
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) {
        row.push_back(format_double(v));
    }
    add_row(std::move(row));
}

std::string CsvWriter::str() const {
    std::string out;
    auto append = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out += ',';
            out += fields[i];
        }
        out += '\n';
    };
    append(header_);
    for (const auto& r : rows_) {
        append(r);
    }
    return out;
}

void CsvWriter::write(const fs::path& path) const { write_file_atomic(path, str()); }

// --- conversions ------------------------------------------------------------

double tension_to_head(double tension_kpa) {
    if (!std::isfinite(tension_kpa) || tension_kpa < 0.0) {
        throw DomainError("tension must be finite and >= 0 kPa, got " + format_double(tension_kpa));
    }
    return tension_kpa == 0.0 ? 0.0 : -tension_kpa * kMetresPerKilopascal;
}

double head_to_tension(double head_m) {
    if (!std::isfinite(head_m)) {
        throw DomainError("head must be finite");
    }
    return head_m >= 0.0 ? 0.0 : -head_m * 9.80665;
}

NormalizedSeries minmax_normalize(std::span<const double> series) {
    NormalizedSeries out;
    if (series.empty()) {
        out.warnings.emplace_back("empty series");
        return out;
    }
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    out.min = *lo;
    out.max = *hi;
    out.values.resize(series.size());
    if (!(out.max > out.min)) {
        std::fill(out.values.begin(), out.values.end(), 0.5);
        out.warnings.emplace_back("constant series; normalised to 0.5");
        return out;
    }
    const double span = out.max - out.min;
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.values[i] = (series[i] - out.min) / span;
    }
    return out;
}

std::vector<double> minmax_denormalize(const NormalizedSeries& normalized) {
    std::vector<double> out(normalized.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = normalized.max > normalized.min
                     ? normalized.min + normalized.values[i] * (normalized.max - normalized.min)
                     : normalized.min;
    }
    return out;
}

// --- domain files -----------------------------------------------------------

namespace {

std::string where(const CsvTable& t, std::size_t row) { return t.source + ":" + std::to_string(t.lines[row]); }

} // namespace

std::vector<SoilSample> load_soil_samples(const fs::path& path) {
    const CsvTable t = read_csv(path);
    std::vector<std::string> issues;
    const std::array<std::string_view, 8> names = {"x_m",   "y_m",         "depth_m",     "theta_s",
                                                   "theta_r", "K_s_m_per_s", "alpha_per_m", "n"};
    std::array<std::size_t, 8> col{};
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!t.has_column(names[i])) {
            issues.push_back(t.source + ": missing column '" + std::string(names[i]) + "'");
        } else {
            col[i] = t.column(names[i]);
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    std::vector<SoilSample> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        try {
            std::array<double, 8> v{};
            for (std::size_t i = 0; i < names.size(); ++i) {
                v[i] = parse_double(t.rows[r][col[i]], where(t, r) + " " + std::string(names[i]));
            }
            SoilSample s{{v[0], v[1], v[2]}, {v[3], v[4], v[5], v[6], v[7]}};
            if (!is_valid(s.params)) {
                validate(s.params);
            }
            if (!(s.position.depth >= 0.0) || !std::isfinite(s.position.x) || !std::isfinite(s.position.y)) {
                throw ValidationError("position must be finite with depth >= 0");
            }
            out.push_back(s);
        } catch (const ValidationError& e) {
            for (const auto& i : e.issues()) issues.push_back(i.find(t.source) == 0 ? i : where(t, r) + ": " + i);
        } catch (const DomainError& e) {
            issues.push_back(where(t, r) + ": " + e.what());
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    return out;
}

void save_soil_samples(const fs::path& path, std::span<const SoilSample> samples) {
    CsvWriter w({"x_m", "y_m", "depth_m", "theta_s", "theta_r", "K_s_m_per_s", "alpha_per_m", "n"});
    for (const auto& s : samples) {
        const std::array<double, 8> v = {s.position.x,     s.position.y,   s.position.depth, s.params.theta_s,
                                         s.params.theta_r, s.params.K_s,   s.params.alpha,   s.params.n};
        w.add_row(v);
    }
    w.write(path);
}

std::vector<WeatherRecord> load_weather(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t cd = t.column("date");
    const std::size_t cp = t.column("precipitation_mm");
    std::vector<std::string> issues;
    std::vector<WeatherRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        try {
            WeatherRecord w;
            w.date_epoch_s = std::floor(parse_iso8601(t.rows[r][cd]) / 86400.0) * 86400.0;
            w.precipitation_mm = parse_double(t.rows[r][cp], "precipitation_mm");
            if (!(w.precipitation_mm >= 0.0)) {
                throw ValidationError("precipitation must be >= 0");
            }
            out.push_back(w);
        } catch (const ValidationError& e) {
            issues.push_back(where(t, r) + ": " + e.issues().front());
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    std::sort(out.begin(), out.end(),
              [](const WeatherRecord& a, const WeatherRecord& b) { return a.date_epoch_s < b.date_epoch_s; });
    return out;
}

IrrigationSchedule rain_schedule(std::span<const WeatherRecord> weather, double scenario_start_epoch_s) {
    std::vector<IrrigationEvent> events;
    for (const auto& w : weather) {
        if (w.precipitation_mm <= 0.0) {
            continue;
        }
        const double start = w.date_epoch_s - scenario_start_epoch_s;
        events.push_back({start, start + 86400.0, w.precipitation_mm / 1000.0 / 86400.0});
    }
    return IrrigationSchedule(std::move(events));
}

std::vector<Index> SensorMap::nodes() const {
    std::vector<Index> out;
    for (const auto& [id, e] : entries) {
        out.push_back(e.node);
    }
    return out;
}

void validate_sensor_map(const SensorMap& map, const CylindricalGrid& grid) {
    std::vector<std::string> issues;
    std::map<Index, std::string> seen;
    for (const auto& [id, e] : map.entries) {
        if (e.node < 0 || e.node >= grid.size()) {
            issues.push_back("sensor '" + id + "': node " + std::to_string(e.node) + " outside [0, " +
                             std::to_string(grid.size()) + ")");
            continue;
        }
        if (auto [it, inserted] = seen.emplace(e.node, id); !inserted) {
            issues.push_back("sensor '" + id + "' shares node " + std::to_string(e.node) + " with '" + it->second + "'");
        }
        if (e.depth_cm < 0 || static_cast<double>(e.depth_cm) / 100.0 > grid.depth()) {
            issues.push_back("sensor '" + id + "': depth " + std::to_string(e.depth_cm) + " cm outside the field");
            continue;
        }
        const int layer = grid.layer_at_depth(e.depth_cm / 100.0);
        if (layer != grid.coord(e.node).iz) {
            issues.push_back("sensor '" + id + "': depth label " + std::to_string(e.depth_cm) + " cm belongs to layer " +
                             std::to_string(layer) + " but node " + std::to_string(e.node) + " is in layer " +
                             std::to_string(grid.coord(e.node).iz));
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

SensorMap load_sensor_map(const fs::path& path, const CylindricalGrid& grid) {
    const CsvTable t = read_csv(path);
    const std::size_t ci = t.column("sensor_id");
    const std::size_t cn = t.column("node_index");
    const std::size_t cd = t.column("depth_cm");
    SensorMap map;
    std::vector<std::string> issues;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& id = t.rows[r][ci];
        try {
            const double node = parse_double(t.rows[r][cn], "node_index");
            const double depth = parse_double(t.rows[r][cd], "depth_cm");
            if (node != std::floor(node) || depth != std::floor(depth)) {
                throw ValidationError("node_index and depth_cm must be integers");
            }
            if (id.empty()) {
                throw ValidationError("empty sensor_id");
            }
            if (!map.entries.emplace(id, SensorMapEntry{static_cast<Index>(node), static_cast<int>(depth)}).second) {
                throw ValidationError("sensor '" + id + "' listed twice");
            }
        } catch (const ValidationError& e) {
            issues.push_back(where(t, r) + ": " + e.issues().front());
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    validate_sensor_map(map, grid);
    return map;
}

void save_sensor_map(const fs::path& path, const SensorMap& map) {
    CsvWriter w({"sensor_id", "node_index", "depth_cm"});
    for (const auto& [id, e] : map.entries) {
        w.add_row(std::vector<std::string>{id, std::to_string(e.node), std::to_string(e.depth_cm)});
    }
    w.write(path);
}

MeasurementLog load_measurements(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t ct = t.column("timestamp");
    const std::size_t cs = t.column("sensor_id");
    const bool tension = t.has_column("tension_kpa");
    if (!tension && !t.has_column("head_m")) {
        throw ValidationError(t.source + ": missing column 'tension_kpa' or 'head_m'");
    }
    const std::size_t cv = t.column(tension ? "tension_kpa" : "head_m");
    MeasurementLog log;
    std::vector<std::string> issues;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        double time = 0.0;
        try {
            time = parse_iso8601(row[ct]);
        } catch (const ValidationError& e) {
            issues.push_back(where(t, r) + ": " + e.issues().front());
            continue;
        }
        const std::string_view raw = trim(row[cv]);
        double value = 0.0;
        bool ok = !raw.empty();
        if (ok) {
            try {
                value = parse_double(raw, "value");
            } catch (const ValidationError&) {
                ok = false;
            }
        }
        if (ok && tension) {
            ok = std::isfinite(value) && value >= 0.0;
        }
        if (ok && !tension) {
            ok = std::isfinite(value);
            if (ok) value = head_to_tension(value);
        }
        if (!ok) {
            ++log.dropped_rows;
            continue;
        }
        log.records.push_back({time, row[cs], value});
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    if (log.dropped_rows > 0) {
        log.warnings.push_back(std::to_string(log.dropped_rows) + " readings missing or unusable; dropped");
    }
    return log;
}

void save_measurements(const fs::path& path, std::span<const Observation> observations, const SensorMap& map,
                       double scenario_start_epoch_s) {
    std::map<Index, std::string> by_node;
    for (const auto& [id, e] : map.entries) {
        by_node[e.node] = id;
    }
    CsvWriter w({"timestamp", "sensor_id", "head_m"});
    for (const auto& o : observations) {
        const auto it = by_node.find(o.node);
        if (it == by_node.end()) {
            throw ValidationError("no sensor mapped to node " + std::to_string(o.node));
        }
        w.add_row(std::vector<std::string>{format_iso8601(scenario_start_epoch_s + o.time_s), it->second,
                                           format_double(o.head_m)});
    }
    w.write(path);
}

ObservationSet to_observations(const MeasurementLog& log, const SensorMap& map, double scenario_start_epoch_s) {
    ObservationSet out;
    for (const auto& r : log.records) {
        const auto it = map.entries.find(r.sensor_id);
        if (it == map.entries.end()) {
            ++out.unknown_sensor;
            continue;
        }
        out.observations.push_back({r.time_epoch_s - scenario_start_epoch_s, it->second.node, tension_to_head(r.tension_kpa)});
    }
    std::stable_sort(out.observations.begin(), out.observations.end(), [](const Observation& a, const Observation& b) {
        return std::tie(a.time_s, a.node) < std::tie(b.time_s, b.node);
    });
    if (out.unknown_sensor > 0) {
        out.warnings.push_back(std::to_string(out.unknown_sensor) + " readings from sensors missing in the sensor map; dropped");
    }
    return out;
}

void save_parameter_field(const fs::path& path, const CylindricalGrid& grid, const ParameterField& field) {
    validate_field(grid, field);
    CsvWriter w({"node_index", "r_m", "theta_rad", "z_m", "theta_s", "theta_r", "K_s_m_per_s", "alpha_per_m", "n"});
    for (Index i = 0; i < grid.size(); ++i) {
        const NodePosition p = grid.position(i);
        const SoilParameters& s = field[static_cast<std::size_t>(i)];
        const std::array<double, 9> v = {static_cast<double>(i), p.r, p.theta, p.z, s.theta_s, s.theta_r,
                                         s.K_s,                  s.alpha, s.n};
        w.add_row(v);
    }
    w.write(path);
}

ParameterField load_parameter_field(const fs::path& path, const CylindricalGrid& grid) {
    const CsvTable t = read_csv(path);
    const std::size_t ci = t.column("node_index");
    const std::array<std::size_t, 5> c = {t.column("theta_s"), t.column("theta_r"), t.column("K_s_m_per_s"),
                                          t.column("alpha_per_m"), t.column("n")};
    if (static_cast<Index>(t.rows.size()) != grid.size()) {
        throw ValidationError(t.source + ": " + std::to_string(t.rows.size()) + " rows for a grid of " +
                              std::to_string(grid.size()) + " nodes");
    }
    ParameterField field(static_cast<std::size_t>(grid.size()));
    std::vector<bool> seen(field.size(), false);
    std::vector<std::string> issues;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        try {
            const double idx = parse_double(t.rows[r][ci], "node_index");
            if (idx < 0 || idx >= static_cast<double>(grid.size()) || idx != std::floor(idx) ||
                seen[static_cast<std::size_t>(idx)]) {
                throw ValidationError("invalid or repeated node_index");
            }
            seen[static_cast<std::size_t>(idx)] = true;
            auto& p = field[static_cast<std::size_t>(idx)];
            p.theta_s = parse_double(t.rows[r][c[0]], "theta_s");
            p.theta_r = parse_double(t.rows[r][c[1]], "theta_r");
            p.K_s = parse_double(t.rows[r][c[2]], "K_s_m_per_s");
            p.alpha = parse_double(t.rows[r][c[3]], "alpha_per_m");
            p.n = parse_double(t.rows[r][c[4]], "n");
            if (!is_valid(p)) {
                throw ValidationError("invalid soil parameters");
            }
        } catch (const ValidationError& e) {
            issues.push_back(where(t, r) + ": " + e.issues().front());
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    return field;
}

void save_trajectory(const fs::path& path, const Trajectory& trajectory, std::string_view prefix) {
    const Index n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
    std::vector<std::string> header{"time_s"};
    for (Index i = 0; i < n; ++i) {
        header.push_back(std::string(prefix) + "_" + std::to_string(i));
    }
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) out += ',';
        out += header[i];
    }
    out += '\n';
    for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
        out += format_double(trajectory.times[k]);
        for (Index i = 0; i < n; ++i) {
            out += ',';
            out += format_double(trajectory.states[k](i));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

Trajectory load_trajectory(const fs::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header.empty() || t.header.front() != "time_s") {
        throw ValidationError(t.source + ": first column must be 'time_s'");
    }
    const auto n = static_cast<Index>(t.header.size() - 1);
    Trajectory tr;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        tr.times.push_back(parse_double(t.rows[r][0], where(t, r) + " time_s"));
        Eigen::VectorXd x(n);
        for (Index i = 0; i < n; ++i) {
            x(i) = parse_double(t.rows[r][static_cast<std::size_t>(i + 1)], where(t, r) + " " + t.header[static_cast<std::size_t>(i + 1)]);
        }
        tr.states.push_back(std::move(x));
    }
    return tr;
}

void save_layout(const fs::path& path, const SensorLayout& layout) {
    CsvWriter w({"node_index"});
    for (Index node : layout.nodes()) {
        w.add_row(std::vector<std::string>{std::to_string(node)});
    }
    w.write(path);
}

SensorLayout load_layout(const fs::path& path, Index state_dimension) {
    const CsvTable t = read_csv(path);
    const std::size_t c = t.column("node_index");
    std::vector<Index> nodes;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double v = parse_double(t.rows[r][c], where(t, r) + " node_index");
        if (v != std::floor(v)) {
            throw ValidationError(where(t, r) + ": node_index must be an integer");
        }
        nodes.push_back(static_cast<Index>(v));
    }
    return SensorLayout(std::move(nodes), state_dimension);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_digest(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string file_digest(const fs::path& path) { return hex_digest(fnv1a(read_file(path))); }

} // namespace soilest
