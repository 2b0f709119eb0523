#pragma once

/**
 * @file twin.hpp
 * @brief Synthetic soil data and the twin experiment.
 *
 * A twin experiment simulates a "truth" with the full model, samples it at
 * the sensor nodes with additive Gaussian noise, and estimates the whole
 * state from those samples starting from a perturbed initial condition.
 * Comparing layouts on the same truth and the same noise realisation
 * isolates the effect of sensor placement.
 */

#include "soilest/ekf.hpp"
#include "soilest/evaluation.hpp"
#include "soilest/kriging.hpp"
#include "soilest/observability.hpp"
#include "soilest/richards.hpp"
#include "soilest/scenario.hpp"

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace soilest {

/// Texture classes mixed by the synthetic generator (class means).
[[nodiscard]] constexpr SoilParameters clay_loam() noexcept { return {0.41, 0.095, 7.22e-7, 1.9, 1.31}; }
[[nodiscard]] constexpr SoilParameters sandy_loam() noexcept { return {0.41, 0.065, 1.228e-5, 7.5, 1.89}; }

/// `count` samples spread over the disk at three depth bands. A spatially
/// correlated latent field (exponential covariance, 30 m range) blends clay
/// loam -> loam -> sandy loam, coarser near the surface.
[[nodiscard]] std::vector<SoilSample> synthetic_samples(int count, double radius_m, double depth_m,
                                                        std::mt19937_64& rng);

struct FieldBuild {
    ParameterField field;
    std::vector<SoilSample> samples; ///< empty when a parameter file was read
    std::optional<ParameterModels> models;
    std::vector<std::string> warnings;
};

/// The scenario's parameter field: read from file, kriged from the sample
/// file, or kriged from seeded synthetic samples, in that order of priority.
[[nodiscard]] FieldBuild build_parameter_field(const Scenario& s);

[[nodiscard]] std::shared_ptr<RichardsModel> build_model(const Scenario& s, ParameterField field);

/// Uniform in [initial_min_m, initial_max_m] per node.
[[nodiscard]] Eigen::VectorXd initial_truth(const Scenario& s, Index n);
/// (1 + mismatch) * truth, or uniform in the guess range.
[[nodiscard]] Eigen::VectorXd initial_estimate(const Scenario& s, const Eigen::VectorXd& truth);

/// truth(node) + N(0, std^2) at every trajectory instant and every node in
/// `nodes` (one reading per node per instant, time-ordered).
[[nodiscard]] std::vector<Observation> synthetic_observations(const Trajectory& truth, std::span<const Index> nodes,
                                                              double noise_std, std::mt19937_64& rng);

struct TwinCase {
    std::string label;
    Index k = 0;
    SensorSelection selection;
    AssimilationResult result;
    MetricSeries head;
    MetricSeries theta;
    double nrmse_head = 0.0;
    double nrmse_theta = 0.0;
    std::optional<double> half_time_s;
};

struct TwinExperiment {
    CylindricalGrid grid{2, 2, 2, 1.0, 1.0};
    FieldBuild field;
    std::shared_ptr<RichardsModel> model;
    Trajectory truth;
    Trajectory truth_theta;
    ObservabilityReport report;
    Eigen::VectorXd initial_estimate;
    /// Open-loop run from the perturbed initial condition (no updates).
    TwinCase open_loop;
    /// For each k: the top-k case followed by the bottom-k case.
    std::vector<TwinCase> cases;
};

/// Runs truth, ranking, and one assimilation per (k, top/bottom) layout.
[[nodiscard]] TwinExperiment run_twin_experiment(const Scenario& s, std::span<const Index> k_values);

/// Assimilates `layout` against an existing truth with shared noise.
[[nodiscard]] TwinCase run_twin_case(const Scenario& s, const RichardsModel& model, const Trajectory& truth,
                                     const Eigen::VectorXd& x0_hat, const SensorSelection& selection,
                                     std::span<const Observation> all_observations, std::string label);

} // namespace soilest
