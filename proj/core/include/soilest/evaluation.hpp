#pragma once

/**
 * @file evaluation.hpp
 * @brief Estimation-quality metrics and map products.
 *
 *     RMSE(k) = sqrt( sum_i (xhat_i(k) - x_i(k))^2 / n )      over a node subset
 *     RMSE    = mean_k RMSE(k)
 *     NRMSE   = RMSE / |ybar|,  ybar = mean of the reference over the run
 */

#include "soilest/ekf.hpp"
#include "soilest/grid.hpp"
#include "soilest/integrator.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace soilest {

/// Throws DomainError for an empty subset, out-of-range nodes or length
/// mismatch.
[[nodiscard]] double rmse_at(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate,
                             std::span<const Index> subset);
/// Over every node.
[[nodiscard]] double rmse_at(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate);

struct MetricSeries {
    std::vector<double> times;
    std::vector<double> rmse;
    double average_rmse = 0.0;
    /// Mean of the reference (actual) values over the subset and the run.
    double reference_mean = 0.0;
    Index instants = 0;
};

/// Empty subset = all nodes. Trajectories must share their time axis.
[[nodiscard]] MetricSeries metric_series(const Trajectory& actual, const Trajectory& estimate,
                                         std::span<const Index> subset = {});

/// Against point readings (validation sensors): RMSE at each estimate
/// instant over the readings nearest to it (within half the instant
/// spacing); instants without readings are skipped. Throws DomainError when
/// no reading aligns.
[[nodiscard]] MetricSeries metric_series(const Trajectory& estimate, std::span<const Observation> readings);

/// average_rmse / |reference_mean|. Throws DomainError when the mean is 0.
[[nodiscard]] double nrmse(const MetricSeries& series);

/// First time at which RMSE drops below fraction * RMSE(first instant).
[[nodiscard]] std::optional<double> time_to_fraction(const MetricSeries& series, double fraction = 0.5);

struct ErrorMap {
    int layer = 0;
    std::vector<Index> nodes;
    Eigen::VectorXd error;          ///< x - xhat (signed)
    Eigen::VectorXd absolute_error; ///< |x - xhat|
    Eigen::VectorXd theta_actual;
    Eigen::VectorXd theta_estimate;
};

/// Per-node errors on one layer (iz index) plus both water-content maps.
/// Throws IndexError for an invalid layer.
[[nodiscard]] ErrorMap error_map(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimate,
                                 const CylindricalGrid& grid, const ParameterField& params, int layer);

/// node_index, r_m, theta_rad, value.
void save_map(const std::filesystem::path& path, const CylindricalGrid& grid, std::span<const Index> nodes,
              const Eigen::VectorXd& values);
/// time_s, rmse.
void save_metric_series(const std::filesystem::path& path, const MetricSeries& series);

} // namespace soilest
