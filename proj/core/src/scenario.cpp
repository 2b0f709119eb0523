#include "soilest/scenario.hpp"

#include "soilest/data_io.hpp"
#include "soilest/error.hpp"

#include <cmath>
#include <set>

namespace soilest {

using nlohmann::json;

std::string_view to_string(BottomBoundary b) noexcept {
    return b == BottomBoundary::free_drainage ? "free_drainage" : "no_flux";
}
std::string_view to_string(ConductivityMean m) noexcept {
    return m == ConductivityMean::arithmetic ? "arithmetic" : "geometric";
}
std::string_view to_string(TransitionMode m) noexcept {
    return m == TransitionMode::exponential ? "exponential" : "first_order";
}
std::string_view to_string(InitialGuess g) noexcept { return g == InitialGuess::mismatch ? "mismatch" : "uniform"; }

namespace {

/// Reads one JSON object, tracking which keys were consumed and collecting
/// type errors instead of throwing on the first.
class Section {
public:
    Section(const json& j, std::string path, std::vector<std::string>& issues)
        : j_(j), path_(std::move(path)), issues_(issues) {
        if (!j_.is_object()) {
            issues_.push_back(path_ + ": expected an object");
        }
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;
    ~Section() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items()) {
            if (!used_.contains(key)) {
                issues_.push_back(path_ + "." + key + ": unknown key");
            }
        }
    }

    [[nodiscard]] const json* find(const std::string& key) {
        used_.insert(key);
        if (!j_.is_object()) return nullptr;
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else issues_.push_back(path_ + "." + key + ": expected a number");
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (v->is_number_integer()) out = v->get<int>();
            else issues_.push_back(path_ + "." + key + ": expected an integer");
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else issues_.push_back(path_ + "." + key + ": expected true or false");
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else issues_.push_back(path_ + "." + key + ": expected a string");
        }
    }
    template <class Enum, class Parse>
    void choice(const std::string& key, Enum& out, Parse parse) {
        std::string text;
        if (find(key) == nullptr) return;
        used_.erase(key);
        string(key, text);
        if (text.empty()) return;
        if (auto v = parse(text)) out = *v;
        else issues_.push_back(path_ + "." + key + ": unknown value '" + text + "'");
    }

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string>& issues_;
    std::set<std::string> used_;
};

std::optional<BottomBoundary> parse_bottom(const std::string& s) {
    if (s == "free_drainage") return BottomBoundary::free_drainage;
    if (s == "no_flux") return BottomBoundary::no_flux;
    return std::nullopt;
}
std::optional<ConductivityMean> parse_mean(const std::string& s) {
    if (s == "arithmetic") return ConductivityMean::arithmetic;
    if (s == "geometric") return ConductivityMean::geometric;
    return std::nullopt;
}
std::optional<TransitionMode> parse_transition(const std::string& s) {
    if (s == "exponential") return TransitionMode::exponential;
    if (s == "first_order") return TransitionMode::first_order;
    return std::nullopt;
}
std::optional<InitialGuess> parse_initial(const std::string& s) {
    if (s == "mismatch") return InitialGuess::mismatch;
    if (s == "uniform") return InitialGuess::uniform;
    return std::nullopt;
}
std::optional<VariogramKind> parse_kind(const std::string& s) {
    try {
        return parse_variogram_kind(s);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

void check(bool ok, std::vector<std::string>& issues, const std::string& message) {
    if (!ok) issues.push_back(message);
}

bool valid_date(const std::string& text) {
    try {
        (void)parse_iso8601(text);
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

} // namespace

std::vector<std::string> validation_issues(const Scenario& s) {
    std::vector<std::string> issues;
    const auto& g = s.grid;
    check(g.n_r >= 1, issues, "grid.n_r must be >= 1");
    check(g.n_az >= 2, issues, "grid.n_az must be >= 2");
    check(g.n_z >= 2, issues, "grid.n_z must be >= 2");
    check(g.radius_m > 0.0 && std::isfinite(g.radius_m), issues, "grid.radius_m must be > 0");
    check(g.depth_m > 0.0 && std::isfinite(g.depth_m), issues, "grid.depth_m must be > 0");

    const auto& so = s.soil;
    check(so.synthetic_samples >= 5, issues, "soil.synthetic_samples must be >= 5");
    check(so.lag_bins >= 2, issues, "soil.lag_bins must be >= 2");
    check(so.max_lag_fraction > 0.0 && so.max_lag_fraction <= 1.0, issues, "soil.max_lag_fraction must be in (0, 1]");
    check(so.anisotropy_ratio > 0.0, issues, "soil.anisotropy_ratio must be > 0");

    const auto& f = s.forcing;
    check(valid_date(f.start), issues, "forcing.start: '" + f.start + "' is not an ISO-8601 timestamp");
    if (f.daily) {
        check(f.daily->rate_mm_per_day >= 0.0, issues, "forcing.daily.rate_mm_per_day must be >= 0");
        check(f.daily->duration_h > 0.0 && f.daily->duration_h <= 24.0, issues,
              "forcing.daily.duration_h must be in (0, 24]");
        check(f.daily->start_hour >= 0.0 && f.daily->start_hour + f.daily->duration_h <= 24.0, issues,
              "forcing.daily window must lie within one day");
    }
    for (std::size_t i = 0; i < f.events.size(); ++i) {
        const auto& e = f.events[i];
        const std::string p = "forcing.events[" + std::to_string(i) + "]";
        check(valid_date(e.date), issues, p + ".date: '" + e.date + "' is not an ISO-8601 date");
        check(e.amount_mm >= 0.0, issues, p + ".amount_mm must be >= 0");
        check(e.duration_h > 0.0, issues, p + ".duration_h must be > 0");
        check(e.start_hour >= 0.0 && e.start_hour < 24.0, issues, p + ".start_hour must be in [0, 24)");
    }
    if (f.pivot.enabled) {
        check(f.pivot.angular_speed_rad_per_s > 0.0, issues, "forcing.pivot.angular_speed_rad_per_s must be > 0");
        check(f.pivot.sector_width_rad > 0.0 && f.pivot.sector_width_rad <= 2.0 * std::numbers::pi, issues,
              "forcing.pivot.sector_width_rad must be in (0, 2 pi]");
    }
    check(f.evaporation_mm_per_day >= 0.0, issues, "forcing.evaporation_mm_per_day must be >= 0");

    check(s.model.capacity_floor > 0.0, issues, "model.capacity_floor must be > 0");
    check(s.model.max_substep_s > 0.0, issues, "model.max_substep_s must be > 0");

    const auto& sim = s.simulation;
    check(sim.horizon_days > 0.0, issues, "simulation.horizon_days must be > 0");
    check(sim.dt_s > 0.0, issues, "simulation.dt_s must be > 0");
    check(sim.process_noise_std >= 0.0, issues, "simulation.process_noise_std must be >= 0");
    check(sim.initial_min_m <= sim.initial_max_m, issues, "simulation.initial_min_m must be <= initial_max_m");
    check(sim.initial_max_m <= 0.0, issues, "simulation initial heads must be <= 0 (unsaturated)");

    const auto& fi = s.filter;
    check(fi.sigma0_m > 0.0, issues, "filter.sigma0_m must be > 0");
    check(fi.process_std >= 0.0, issues, "filter.process_std must be >= 0");
    check(fi.measurement_std > 0.0, issues, "filter.measurement_std must be > 0");
    check(fi.initial_mismatch > -1.0, issues, "filter.initial_mismatch must be > -1");
    check(fi.guess_min_m <= fi.guess_max_m, issues, "filter.guess_min_m must be <= guess_max_m");
    check(fi.plausible_min_m < fi.plausible_max_m, issues, "filter plausibility band is empty");

    check(s.observability.sensors >= 1, issues, "observability.sensors must be >= 1");
    check(s.observability.snapshot_stride >= 1, issues, "observability.snapshot_stride must be >= 1");
    check(!s.observability.candidates_from_sensor_map || !s.sensor_map_csv.empty(), issues,
          "observability.candidates_from_sensor_map requires sensor_map_csv");
    return issues;
}

json to_json(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["grid"] = {{"n_r", s.grid.n_r},
                 {"n_az", s.grid.n_az},
                 {"n_z", s.grid.n_z},
                 {"radius_m", s.grid.radius_m},
                 {"depth_m", s.grid.depth_m}};
    j["soil"] = {{"samples_csv", s.soil.samples_csv},
                 {"parameter_field_csv", s.soil.parameter_field_csv},
                 {"synthetic_samples", s.soil.synthetic_samples},
                 {"variogram", std::string(to_string(s.soil.variogram))},
                 {"lag_bins", s.soil.lag_bins},
                 {"max_lag_fraction", s.soil.max_lag_fraction},
                 {"fit_nugget", s.soil.fit_nugget},
                 {"anisotropy_ratio", s.soil.anisotropy_ratio}};
    json f;
    f["start"] = s.forcing.start;
    if (s.forcing.daily) {
        f["daily"] = {{"rate_mm_per_day", s.forcing.daily->rate_mm_per_day},
                      {"start_hour", s.forcing.daily->start_hour},
                      {"duration_h", s.forcing.daily->duration_h}};
    } else {
        f["daily"] = nullptr;
    }
    f["events"] = json::array();
    for (const auto& e : s.forcing.events) {
        f["events"].push_back(
            {{"date", e.date}, {"amount_mm", e.amount_mm}, {"start_hour", e.start_hour}, {"duration_h", e.duration_h}});
    }
    f["pivot"] = {{"enabled", s.forcing.pivot.enabled},
                  {"angular_speed_rad_per_s", s.forcing.pivot.angular_speed_rad_per_s},
                  {"sector_width_rad", s.forcing.pivot.sector_width_rad},
                  {"start_angle_rad", s.forcing.pivot.start_angle_rad}};
    f["weather_csv"] = s.forcing.weather_csv;
    f["evaporation_mm_per_day"] = s.forcing.evaporation_mm_per_day;
    j["forcing"] = f;
    j["model"] = {{"bottom", std::string(to_string(s.model.bottom))},
                  {"conductivity_mean", std::string(to_string(s.model.conductivity_mean))},
                  {"capacity_floor", s.model.capacity_floor},
                  {"max_substep_s", s.model.max_substep_s}};
    j["simulation"] = {{"horizon_days", s.simulation.horizon_days},
                       {"dt_s", s.simulation.dt_s},
                       {"process_noise_std", s.simulation.process_noise_std},
                       {"initial_min_m", s.simulation.initial_min_m},
                       {"initial_max_m", s.simulation.initial_max_m}};
    j["filter"] = {{"sigma0_m", s.filter.sigma0_m},
                   {"process_std", s.filter.process_std},
                   {"measurement_std", s.filter.measurement_std},
                   {"initial", std::string(to_string(s.filter.initial))},
                   {"initial_mismatch", s.filter.initial_mismatch},
                   {"guess_min_m", s.filter.guess_min_m},
                   {"guess_max_m", s.filter.guess_max_m},
                   {"transition", std::string(to_string(s.filter.transition))},
                   {"joseph", s.filter.joseph},
                   {"plausible_min_m", s.filter.plausible_min_m},
                   {"plausible_max_m", s.filter.plausible_max_m}};
    j["observability"] = {{"sensors", s.observability.sensors},
                          {"snapshot_stride", s.observability.snapshot_stride},
                          {"candidates_from_sensor_map", s.observability.candidates_from_sensor_map}};
    j["sensor_map_csv"] = s.sensor_map_csv;
    j["measurements_csv"] = s.measurements_csv;
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    std::vector<std::string> issues;
    {
        Section root(j, "config", issues);
        if (const json* v = root.find("seed")) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
                s.seed = v->get<std::uint64_t>();
            } else {
                issues.emplace_back("config.seed: expected a non-negative integer");
            }
        }
        if (const json* v = root.find("grid")) {
            Section g(*v, "grid", issues);
            g.integer("n_r", s.grid.n_r);
            g.integer("n_az", s.grid.n_az);
            g.integer("n_z", s.grid.n_z);
            g.number("radius_m", s.grid.radius_m);
            g.number("depth_m", s.grid.depth_m);
        }
        if (const json* v = root.find("soil")) {
            Section so(*v, "soil", issues);
            so.string("samples_csv", s.soil.samples_csv);
            so.string("parameter_field_csv", s.soil.parameter_field_csv);
            so.integer("synthetic_samples", s.soil.synthetic_samples);
            so.choice("variogram", s.soil.variogram, parse_kind);
            so.integer("lag_bins", s.soil.lag_bins);
            so.number("max_lag_fraction", s.soil.max_lag_fraction);
            so.boolean("fit_nugget", s.soil.fit_nugget);
            so.number("anisotropy_ratio", s.soil.anisotropy_ratio);
        }
        if (const json* v = root.find("forcing")) {
            Section f(*v, "forcing", issues);
            f.string("start", s.forcing.start);
            if (const json* d = f.find("daily")) {
                if (d->is_null()) {
                    s.forcing.daily.reset();
                } else {
                    DailyIrrigation daily;
                    Section ds(*d, "forcing.daily", issues);
                    ds.number("rate_mm_per_day", daily.rate_mm_per_day);
                    ds.number("start_hour", daily.start_hour);
                    ds.number("duration_h", daily.duration_h);
                    s.forcing.daily = daily;
                }
            }
            if (const json* ev = f.find("events")) {
                if (!ev->is_array()) {
                    issues.emplace_back("forcing.events: expected an array");
                } else {
                    for (std::size_t i = 0; i < ev->size(); ++i) {
                        IrrigationEntry e;
                        Section es((*ev)[i], "forcing.events[" + std::to_string(i) + "]", issues);
                        es.string("date", e.date);
                        es.number("amount_mm", e.amount_mm);
                        es.number("start_hour", e.start_hour);
                        es.number("duration_h", e.duration_h);
                        s.forcing.events.push_back(e);
                    }
                }
            }
            if (const json* p = f.find("pivot")) {
                Section ps(*p, "forcing.pivot", issues);
                ps.boolean("enabled", s.forcing.pivot.enabled);
                ps.number("angular_speed_rad_per_s", s.forcing.pivot.angular_speed_rad_per_s);
                ps.number("sector_width_rad", s.forcing.pivot.sector_width_rad);
                ps.number("start_angle_rad", s.forcing.pivot.start_angle_rad);
            }
            f.string("weather_csv", s.forcing.weather_csv);
            f.number("evaporation_mm_per_day", s.forcing.evaporation_mm_per_day);
        }
        if (const json* v = root.find("model")) {
            Section m(*v, "model", issues);
            m.choice("bottom", s.model.bottom, parse_bottom);
            m.choice("conductivity_mean", s.model.conductivity_mean, parse_mean);
            m.number("capacity_floor", s.model.capacity_floor);
            m.number("max_substep_s", s.model.max_substep_s);
        }
        if (const json* v = root.find("simulation")) {
            Section m(*v, "simulation", issues);
            m.number("horizon_days", s.simulation.horizon_days);
            m.number("dt_s", s.simulation.dt_s);
            m.number("process_noise_std", s.simulation.process_noise_std);
            m.number("initial_min_m", s.simulation.initial_min_m);
            m.number("initial_max_m", s.simulation.initial_max_m);
        }
        if (const json* v = root.find("filter")) {
            Section m(*v, "filter", issues);
            m.number("sigma0_m", s.filter.sigma0_m);
            m.number("process_std", s.filter.process_std);
            m.number("measurement_std", s.filter.measurement_std);
            m.choice("initial", s.filter.initial, parse_initial);
            m.number("initial_mismatch", s.filter.initial_mismatch);
            m.number("guess_min_m", s.filter.guess_min_m);
            m.number("guess_max_m", s.filter.guess_max_m);
            m.choice("transition", s.filter.transition, parse_transition);
            m.boolean("joseph", s.filter.joseph);
            m.number("plausible_min_m", s.filter.plausible_min_m);
            m.number("plausible_max_m", s.filter.plausible_max_m);
        }
        if (const json* v = root.find("observability")) {
            Section m(*v, "observability", issues);
            m.integer("sensors", s.observability.sensors);
            m.integer("snapshot_stride", s.observability.snapshot_stride);
            m.boolean("candidates_from_sensor_map", s.observability.candidates_from_sensor_map);
        }
        root.string("sensor_map_csv", s.sensor_map_csv);
        root.string("measurements_csv", s.measurements_csv);
    }
    // Keys that failed to parse kept their defaults, so the invariant checks
    // only add genuine problems.
    for (auto& issue : validation_issues(s)) {
        issues.push_back(std::move(issue));
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
    return s;
}

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

} // namespace

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    Scenario s = scenario_from_json(j);
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    s.soil.samples_csv = resolve(base, s.soil.samples_csv);
    s.soil.parameter_field_csv = resolve(base, s.soil.parameter_field_csv);
    s.forcing.weather_csv = resolve(base, s.forcing.weather_csv);
    s.sensor_map_csv = resolve(base, s.sensor_map_csv);
    s.measurements_csv = resolve(base, s.measurements_csv);
    if (!s.sensor_map_csv.empty()) {
        (void)load_sensor_map(s.sensor_map_csv, s.grid.build());
    }
    return s;
}

void save_scenario(const std::filesystem::path& path, const Scenario& s) {
    write_file_atomic(path, to_json(s).dump(2) + "\n");
}

std::string canonical_json(const Scenario& s) { return to_json(s).dump(); }

std::string scenario_hash(const Scenario& s) { return hex_digest(fnv1a(canonical_json(s))); }

std::vector<IrrigationEntry> season_irrigation_log() {
    return {{"2019-07-04", 1.81, 0.0, 8.0},
            {"2019-07-18", 1.58, 0.0, 8.0},
            {"2019-07-26", 1.58, 0.0, 8.0},
            {"2019-07-30", 1.51, 0.0, 8.0},
            {"2019-08-06", 3.16, 0.0, 8.0}};
}

double scenario_start_epoch(const Scenario& s) { return parse_iso8601(s.forcing.start); }

double horizon_seconds(const Scenario& s) { return s.simulation.horizon_days * 86400.0; }

Forcing build_forcing(const Scenario& s) {
    const double t0 = scenario_start_epoch(s);
    const double horizon = horizon_seconds(s);
    std::vector<IrrigationEvent> events;
    if (s.forcing.daily && s.forcing.daily->rate_mm_per_day > 0.0) {
        const auto& d = *s.forcing.daily;
        const double rate = d.rate_mm_per_day / 1000.0 / 86400.0;
        const int days = static_cast<int>(std::ceil(horizon / 86400.0)) + 1;
        for (int day = 0; day < days; ++day) {
            const double start = day * 86400.0 + d.start_hour * 3600.0;
            events.push_back({start, start + d.duration_h * 3600.0, rate});
        }
    }
    for (const auto& e : s.forcing.events) {
        const double day = std::floor(parse_iso8601(e.date) / 86400.0) * 86400.0;
        const double start = day - t0 + e.start_hour * 3600.0;
        const double duration = e.duration_h * 3600.0;
        events.push_back({start, start + duration, e.amount_mm / 1000.0 / duration});
    }
    std::optional<PivotSweep> pivot;
    if (s.forcing.pivot.enabled) {
        pivot = PivotSweep{s.forcing.pivot.angular_speed_rad_per_s, s.forcing.pivot.sector_width_rad,
                           s.forcing.pivot.start_angle_rad};
    }
    Forcing f;
    f.irrigation = IrrigationSchedule(std::move(events), pivot);
    if (!s.forcing.weather_csv.empty()) {
        f.rain = rain_schedule(load_weather(s.forcing.weather_csv), t0);
    }
    f.evaporation_m_per_s = s.forcing.evaporation_mm_per_day / 1000.0 / 86400.0;
    return f;
}

ModelOptions build_model_options(const Scenario& s) {
    ModelOptions o;
    o.mean = s.model.conductivity_mean;
    o.capacity_floor = s.model.capacity_floor;
    return o;
}

StepOptions build_step_options(const Scenario& s) {
    StepOptions o;
    o.max_substep_s = s.model.max_substep_s;
    return o;
}

FilterOptions build_filter_options(const Scenario& s) {
    FilterOptions o;
    o.transition = s.filter.transition;
    o.joseph = s.filter.joseph;
    o.plausible_min_m = s.filter.plausible_min_m;
    o.plausible_max_m = s.filter.plausible_max_m;
    return o;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

} // namespace soilest
