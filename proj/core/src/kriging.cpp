#include "soilest/kriging.hpp"

#include "soilest/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace soilest {

std::string_view parameter_name(SoilParameterId id) noexcept {
    switch (id) {
    case SoilParameterId::theta_s: return "theta_s";
    case SoilParameterId::theta_r: return "theta_r";
    case SoilParameterId::K_s: return "K_s";
    case SoilParameterId::alpha: return "alpha";
    case SoilParameterId::n: return "n";
    }
    return "?";
}

double get_parameter(const SoilParameters& p, SoilParameterId id) noexcept {
    switch (id) {
    case SoilParameterId::theta_s: return p.theta_s;
    case SoilParameterId::theta_r: return p.theta_r;
    case SoilParameterId::K_s: return p.K_s;
    case SoilParameterId::alpha: return p.alpha;
    case SoilParameterId::n: return p.n;
    }
    return 0.0;
}

void set_parameter(SoilParameters& p, SoilParameterId id, double value) noexcept {
    switch (id) {
    case SoilParameterId::theta_s: p.theta_s = value; break;
    case SoilParameterId::theta_r: p.theta_r = value; break;
    case SoilParameterId::K_s: p.K_s = value; break;
    case SoilParameterId::alpha: p.alpha = value; break;
    case SoilParameterId::n: p.n = value; break;
    }
}

double to_kriging_space(SoilParameterId id, double value) noexcept {
    return id == SoilParameterId::K_s ? std::log(value) : value;
}

double from_kriging_space(SoilParameterId id, double value) noexcept {
    return id == SoilParameterId::K_s ? std::exp(value) : value;
}

std::string_view to_string(VariogramKind kind) noexcept {
    switch (kind) {
    case VariogramKind::exponential: return "exponential";
    case VariogramKind::spherical: return "spherical";
    case VariogramKind::gaussian: return "gaussian";
    }
    return "?";
}

VariogramKind parse_variogram_kind(std::string_view name) {
    if (name == "exponential") return VariogramKind::exponential;
    if (name == "spherical") return VariogramKind::spherical;
    if (name == "gaussian") return VariogramKind::gaussian;
    throw ValidationError("unknown variogram kind '" + std::string(name) + "'");
}

namespace {

double shape(VariogramKind kind, double s) noexcept {
    switch (kind) {
    case VariogramKind::exponential: return -std::expm1(-s);
    case VariogramKind::spherical: return s >= 1.0 ? 1.0 : 1.5 * s - 0.5 * s * s * s;
    case VariogramKind::gaussian: return -std::expm1(-s * s);
    }
    return 0.0;
}

} // namespace

double VariogramModel::operator()(double h) const noexcept {
    if (h <= 0.0) {
        return 0.0;
    }
    return nugget + (sill - nugget) * shape(kind, h / range);
}

void VariogramModel::validate() const {
    std::vector<std::string> issues;
    if (!(nugget >= 0.0) || !std::isfinite(nugget)) issues.emplace_back("variogram nugget must be >= 0");
    if (!(sill > nugget) || !std::isfinite(sill)) issues.emplace_back("variogram sill must exceed the nugget");
    if (!(range > 0.0) || !std::isfinite(range)) issues.emplace_back("variogram range must be > 0");
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

double KrigingGeometry::distance(const Point3& a, const Point3& b) const noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dv = (a.depth - b.depth) / anisotropy_ratio;
    return std::sqrt(dx * dx + dy * dy + dv * dv);
}

EmpiricalVariogram empirical_variogram(std::span<const Point3> points, std::span<const double> values,
                                       const KrigingGeometry& geometry, int lag_bins, double max_lag_fraction) {
    if (points.size() != values.size()) {
        throw DomainError("points and values differ in length");
    }
    if (lag_bins < 1 || !(max_lag_fraction > 0.0)) {
        throw DomainError("lag_bins must be >= 1 and max_lag_fraction > 0");
    }
    double max_distance = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            max_distance = std::max(max_distance, geometry.distance(points[i], points[j]));
        }
    }
    if (max_distance <= 0.0) {
        throw DomainError("degenerate sample geometry: all samples collocated");
    }

    const double max_lag = std::min(max_lag_fraction, 1.0) * max_distance;
    const double width = max_lag / lag_bins;
    std::vector<double> lag_sum(static_cast<std::size_t>(lag_bins), 0.0);
    std::vector<double> gamma_sum(static_cast<std::size_t>(lag_bins), 0.0);
    std::vector<int> count(static_cast<std::size_t>(lag_bins), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = geometry.distance(points[i], points[j]);
            if (d > max_lag * (1.0 + 1e-12)) {
                continue;
            }
            const auto bin = static_cast<std::size_t>(std::min(static_cast<int>(d / width), lag_bins - 1));
            const double diff = values[i] - values[j];
            lag_sum[bin] += d;
            gamma_sum[bin] += 0.5 * diff * diff;
            ++count[bin];
        }
    }

    EmpiricalVariogram ev;
    for (std::size_t b = 0; b < count.size(); ++b) {
        if (count[b] > 0) {
            ev.lag.push_back(lag_sum[b] / count[b]);
            ev.gamma.push_back(gamma_sum[b] / count[b]);
            ev.pairs.push_back(count[b]);
        }
    }
    return ev;
}

namespace {

struct TrialFit {
    double nugget = 0.0;
    double psill = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

TrialFit fit_for_range(const EmpiricalVariogram& ev, VariogramKind kind, double range, bool fit_nugget) {
    double sw = 0, sf = 0, sff = 0, sg = 0, sfg = 0;
    for (std::size_t k = 0; k < ev.lag.size(); ++k) {
        const double w = ev.pairs[k];
        const double f = shape(kind, ev.lag[k] / range);
        sw += w;
        sf += w * f;
        sff += w * f * f;
        sg += w * ev.gamma[k];
        sfg += w * f * ev.gamma[k];
    }
    TrialFit fit;
    const auto no_nugget = [&] {
        fit.nugget = 0.0;
        fit.psill = sff > 0.0 ? std::max(0.0, sfg / sff) : 0.0;
    };
    if (fit_nugget) {
        const double det = sw * sff - sf * sf;
        if (std::abs(det) > 1e-14 * sw * sff) {
            fit.nugget = (sg * sff - sf * sfg) / det;
            fit.psill = (sw * sfg - sf * sg) / det;
        }
        if (fit.nugget < 0.0 || std::abs(det) <= 1e-14 * sw * sff) {
            no_nugget();
        }
        if (fit.psill < 0.0) {
            fit.psill = 0.0;
            fit.nugget = std::max(0.0, sg / sw);
        }
    } else {
        no_nugget();
    }
    fit.sse = 0.0;
    for (std::size_t k = 0; k < ev.lag.size(); ++k) {
        const double r = fit.nugget + fit.psill * shape(kind, ev.lag[k] / range) - ev.gamma[k];
        fit.sse += ev.pairs[k] * r * r;
    }
    return fit;
}

} // namespace

VariogramModel fit_variogram(std::span<const Point3> points, std::span<const double> values,
                             const VariogramFitOptions& options) {
    if (points.size() < 5) {
        throw DomainError("variogram fitting needs at least 5 samples, got " + std::to_string(points.size()));
    }
    EmpiricalVariogram ev =
        empirical_variogram(points, values, options.geometry, options.lag_bins, options.max_lag_fraction);
    if (ev.lag.size() < 3) {
        ev = empirical_variogram(points, values, options.geometry, options.lag_bins, 1.0);
    }

    const double min_lag = *std::min_element(ev.lag.begin(), ev.lag.end());
    const double max_lag = *std::max_element(ev.lag.begin(), ev.lag.end());
    const double lo = std::log(std::max(min_lag, 1e-9 * max_lag) * 0.2);
    const double hi = std::log(max_lag * 10.0);

    // Coarse log-spaced scan, then golden-section refinement around the best.
    constexpr int scan = 60;
    int best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double a = std::exp(lo + (hi - lo) * i / scan);
        const double sse = fit_for_range(ev, options.kind, a, options.fit_nugget).sse;
        if (sse < best_sse * (1.0 - 1e-12)) {
            best_sse = sse;
            best = i;
        }
    }
    double left = lo + (hi - lo) * std::max(best - 1, 0) / scan;
    double right = lo + (hi - lo) * std::min(best + 1, scan) / scan;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = right - golden * (right - left);
    double d = left + golden * (right - left);
    auto sse_at = [&](double log_a) { return fit_for_range(ev, options.kind, std::exp(log_a), options.fit_nugget).sse; };
    double fc = sse_at(c);
    double fd = sse_at(d);
    for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
            right = d;
            d = c;
            fd = fc;
            c = right - golden * (right - left);
            fc = sse_at(c);
        } else {
            left = c;
            c = d;
            fc = fd;
            d = left + golden * (right - left);
            fd = sse_at(d);
        }
    }
    double log_range = 0.5 * (left + right);
    if (sse_at(log_range) > best_sse) {
        log_range = lo + (hi - lo) * best / scan;
    }

    const double range = std::exp(log_range);
    const TrialFit fit = fit_for_range(ev, options.kind, range, options.fit_nugget);

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    const double psill_floor = 1e-12 * std::max(1.0, mean * mean);

    VariogramModel model;
    model.kind = options.kind;
    model.nugget = fit.nugget;
    model.sill = fit.nugget + std::max(fit.psill, psill_floor);
    model.range = range;
    return model;
}

VariogramModel fit_variogram(std::span<const SoilSample> samples, SoilParameterId parameter,
                             const VariogramFitOptions& options) {
    std::vector<Point3> points;
    std::vector<double> values;
    points.reserve(samples.size());
    values.reserve(samples.size());
    for (const auto& s : samples) {
        points.push_back(s.position);
        values.push_back(to_kriging_space(parameter, get_parameter(s.params, parameter)));
    }
    return fit_variogram(points, values, options);
}

OrdinaryKriging::OrdinaryKriging(std::vector<Point3> points, std::vector<double> values, VariogramModel model,
                                 KrigingGeometry geometry)
    : points_(std::move(points)), model_(model), geometry_(geometry) {
    if (points_.size() != values.size() || points_.empty()) {
        throw DomainError("Kriging needs equally many (and at least one) points and values");
    }
    model_.validate();
    values_ = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));

    // Weights do not depend on the overall scale of the variogram, so the
    // system is assembled with gamma / sill for conditioning.
    const auto n = static_cast<Index>(points_.size());
    Eigen::MatrixXd a(n + 1, n + 1);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            a(i, j) = model_(geometry_.distance(points_[static_cast<std::size_t>(i)],
                                                points_[static_cast<std::size_t>(j)])) /
                      model_.sill;
        }
        a(i, n) = 1.0;
        a(n, i) = 1.0;
    }
    a(n, n) = 0.0;
    lu_.compute(a);
    singular_ = !lu_.isInvertible();
}

Eigen::VectorXd OrdinaryKriging::right_hand_side(const Point3& query) const {
    const auto n = static_cast<Index>(points_.size());
    Eigen::VectorXd b(n + 1);
    for (Index i = 0; i < n; ++i) {
        b(i) = model_(geometry_.distance(points_[static_cast<std::size_t>(i)], query)) / model_.sill;
    }
    b(n) = 1.0;
    return b;
}

KrigingWeights OrdinaryKriging::weights(const Point3& query) const {
    if (singular_) {
        throw NumericalError("singular ordinary Kriging system");
    }
    const Eigen::VectorXd solution = lu_.solve(right_hand_side(query));
    const auto n = static_cast<Index>(points_.size());
    return {solution.head(n), solution(n) * model_.sill};
}

double OrdinaryKriging::nearest_neighbour(const Point3& query) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = geometry_.distance(points_[i], query);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return values_(static_cast<Index>(best));
}

double OrdinaryKriging::predict(const Point3& query) const {
    if (singular_) {
        return nearest_neighbour(query);
    }
    return weights(query).weights.dot(values_);
}

Point3 node_point(const CylindricalGrid& grid, Index node) {
    const NodePosition p = grid.position(node);
    return {p.r * std::cos(p.theta), p.r * std::sin(p.theta), grid.depth() - p.z};
}

SoilParameters project_to_valid(SoilParameters p) noexcept {
    p.theta_s = std::clamp(p.theta_s, 0.01, 0.999);
    p.theta_r = std::clamp(p.theta_r, 1e-4, p.theta_s - 1e-3);
    p.n = std::max(p.n, 1.0 + 1e-3);
    p.alpha = std::max(p.alpha, 1e-6);
    p.K_s = std::max(p.K_s, 1e-15);
    return p;
}

KrigedField krige_field(std::span<const SoilSample> samples, const CylindricalGrid& grid,
                        const ParameterModels& models, const KrigingGeometry& geometry) {
    if (samples.empty()) {
        throw DomainError("krige_field needs at least one sample");
    }
    KrigedField out;
    out.field.assign(static_cast<std::size_t>(grid.size()), SoilParameters{});

    std::vector<Point3> points;
    points.reserve(samples.size());
    for (const auto& s : samples) {
        points.push_back(s.position);
    }
    std::vector<Point3> nodes(static_cast<std::size_t>(grid.size()));
    for (Index i = 0; i < grid.size(); ++i) {
        nodes[static_cast<std::size_t>(i)] = node_point(grid, i);
    }

    for (std::size_t k = 0; k < all_soil_parameters.size(); ++k) {
        const SoilParameterId id = all_soil_parameters[k];
        std::vector<double> values;
        values.reserve(samples.size());
        for (const auto& s : samples) {
            values.push_back(to_kriging_space(id, get_parameter(s.params, id)));
        }
        const OrdinaryKriging kriging(points, std::move(values), models[k], geometry);
        if (kriging.singular()) {
            out.warnings.push_back(std::string(parameter_name(id)) +
                                   ": singular Kriging system, nearest-neighbour fallback used");
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            set_parameter(out.field[i], id, from_kriging_space(id, kriging.predict(nodes[i])));
        }
    }

    for (auto& p : out.field) {
        const SoilParameters projected = project_to_valid(p);
        if (!(projected == p)) {
            ++out.projected_nodes;
            p = projected;
        }
    }
    if (out.projected_nodes > 0) {
        out.warnings.push_back(std::to_string(out.projected_nodes) +
                               " node(s) projected back onto physical parameter bounds");
    }
    return out;
}

ParameterModels fit_parameter_models(std::span<const SoilSample> samples, const VariogramFitOptions& options) {
    ParameterModels models;
    for (std::size_t k = 0; k < all_soil_parameters.size(); ++k) {
        models[k] = fit_variogram(samples, all_soil_parameters[k], options);
    }
    return models;
}

} // namespace soilest
