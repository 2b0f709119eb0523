#include "soilest/evaluation.hpp"

#include "soilest/data_io.hpp"
#include "soilest/error.hpp"
#include "soilest/soil_hydraulics.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace soilest {

double rmse_at(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate, std::span<const Index> subset) {
    if (actual.size() != estimate.size()) {
        throw DomainError("rmse: actual and estimate differ in length");
    }
    if (subset.empty()) {
        throw DomainError("rmse: empty node subset");
    }
    double sum = 0.0;
    for (Index i : subset) {
        if (i < 0 || i >= actual.size()) {
            throw DomainError("rmse: node " + std::to_string(i) + " out of range");
        }
        const double d = estimate(i) - actual(i);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(subset.size()));
}

double rmse_at(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate) {
    if (actual.size() != estimate.size()) {
        throw DomainError("rmse: actual and estimate differ in length");
    }
    if (actual.size() == 0) {
        throw DomainError("rmse: empty vectors");
    }
    return std::sqrt((estimate - actual).squaredNorm() / static_cast<double>(actual.size()));
}

MetricSeries metric_series(const Trajectory& actual, const Trajectory& estimate, std::span<const Index> subset) {
    if (actual.states.size() != estimate.states.size() || actual.states.empty()) {
        throw DomainError("metric series: trajectories must be non-empty and of equal length");
    }
    std::vector<Index> all;
    if (subset.empty()) {
        all.resize(static_cast<std::size_t>(actual.states.front().size()));
        std::iota(all.begin(), all.end(), Index{0});
        subset = all;
    }
    MetricSeries out;
    double ref_sum = 0.0;
    for (std::size_t k = 0; k < actual.states.size(); ++k) {
        if (std::abs(actual.times[k] - estimate.times[k]) > 1e-6 * std::max(1.0, std::abs(actual.times[k]))) {
            throw DomainError("metric series: trajectories are sampled at different times");
        }
        out.times.push_back(actual.times[k]);
        out.rmse.push_back(rmse_at(actual.states[k], estimate.states[k], subset));
        for (Index i : subset) {
            ref_sum += actual.states[k](i);
        }
    }
    out.instants = static_cast<Index>(out.rmse.size());
    out.average_rmse = std::accumulate(out.rmse.begin(), out.rmse.end(), 0.0) / static_cast<double>(out.instants);
    out.reference_mean = ref_sum / static_cast<double>(out.instants * static_cast<Index>(subset.size()));
    return out;
}

MetricSeries metric_series(const Trajectory& estimate, std::span<const Observation> readings) {
    if (estimate.states.empty()) {
        throw DomainError("metric series: empty estimate trajectory");
    }
    const double spacing = estimate.times.size() > 1 ? estimate.times[1] - estimate.times[0] : 1.0;
    std::map<std::size_t, std::vector<const Observation*>> by_instant;
    for (const Observation& o : readings) {
        const double pos = (o.time_s - estimate.times.front()) / spacing;
        const auto k = static_cast<long>(std::llround(pos));
        if (k < 0 || k >= static_cast<long>(estimate.times.size()) ||
            std::abs(o.time_s - estimate.times[static_cast<std::size_t>(k)]) > 0.5 * spacing) {
            continue;
        }
        if (o.node < 0 || o.node >= estimate.states.front().size()) {
            throw DomainError("reading at node " + std::to_string(o.node) + " outside the state");
        }
        by_instant[static_cast<std::size_t>(k)].push_back(&o);
    }
    if (by_instant.empty()) {
        throw DomainError("metric series: no reading falls on the estimate's time axis");
    }
    MetricSeries out;
    double ref_sum = 0.0;
    Index ref_count = 0;
    for (const auto& [k, obs] : by_instant) {
        double sum = 0.0;
        for (const Observation* o : obs) {
            const double d = estimate.states[k](o->node) - o->head_m;
            sum += d * d;
            ref_sum += o->head_m;
        }
        ref_count += static_cast<Index>(obs.size());
        out.times.push_back(estimate.times[k]);
        out.rmse.push_back(std::sqrt(sum / static_cast<double>(obs.size())));
    }
    out.instants = static_cast<Index>(out.rmse.size());
    out.average_rmse = std::accumulate(out.rmse.begin(), out.rmse.end(), 0.0) / static_cast<double>(out.instants);
    out.reference_mean = ref_sum / static_cast<double>(ref_count);
    return out;
}

double nrmse(const MetricSeries& series) {
    if (series.reference_mean == 0.0) {
        throw DomainError("NRMSE undefined: reference mean is zero");
    }
    return series.average_rmse / std::abs(series.reference_mean);
}

std::optional<double> time_to_fraction(const MetricSeries& series, double fraction) {
    if (series.rmse.empty()) {
        return std::nullopt;
    }
    const double threshold = fraction * series.rmse.front();
    for (std::size_t k = 1; k < series.rmse.size(); ++k) {
        if (series.rmse[k] < threshold) {
            return series.times[k];
        }
    }
    return std::nullopt;
}

ErrorMap error_map(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate, const CylindricalGrid& grid,
                   const ParameterField& params, int layer) {
    if (layer < 0 || layer >= grid.n_z()) {
        throw IndexError("layer " + std::to_string(layer) + " outside [0, " + std::to_string(grid.n_z()) + ")");
    }
    if (actual.size() != grid.size() || estimate.size() != grid.size()) {
        throw DomainError("error map: state length does not match the grid");
    }
    validate_field(grid, params);
    ErrorMap m;
    m.layer = layer;
    m.nodes = grid.layer_nodes(layer);
    const auto n = static_cast<Index>(m.nodes.size());
    m.error.resize(n);
    m.absolute_error.resize(n);
    m.theta_actual.resize(n);
    m.theta_estimate.resize(n);
    for (Index k = 0; k < n; ++k) {
        const Index i = m.nodes[static_cast<std::size_t>(k)];
        const SoilParameters& p = params[static_cast<std::size_t>(i)];
        m.error(k) = actual(i) - estimate(i);
        m.absolute_error(k) = std::abs(m.error(k));
        m.theta_actual(k) = water_content(actual(i), p);
        m.theta_estimate(k) = water_content(estimate(i), p);
    }
    return m;
}

void save_map(const std::filesystem::path& path, const CylindricalGrid& grid, std::span<const Index> nodes,
              const Eigen::VectorXd& values) {
    if (static_cast<Index>(nodes.size()) != values.size()) {
        throw DomainError("map: one value per node required");
    }
    CsvWriter w({"node_index", "r_m", "theta_rad", "value"});
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const NodePosition p = grid.position(nodes[k]);
        const std::array<double, 4> row = {static_cast<double>(nodes[k]), p.r, p.theta,
                                           values(static_cast<Index>(k))};
        w.add_row(row);
    }
    w.write(path);
}

void save_metric_series(const std::filesystem::path& path, const MetricSeries& series) {
    CsvWriter w({"time_s", "rmse"});
    for (std::size_t k = 0; k < series.rmse.size(); ++k) {
        const std::array<double, 2> row = {series.times[k], series.rmse[k]};
        w.add_row(row);
    }
    w.write(path);
}

} // namespace soilest
