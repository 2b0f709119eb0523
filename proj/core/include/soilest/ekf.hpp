#pragma once

/**
 * @file ekf.hpp
 * @brief Discrete-time extended Kalman filter for point head measurements.
 *
 * Prediction
 *     x_{k+1|k} = step(x_{k|k})
 *     P_{k+1|k} = Phi P_{k|k} Phi^T + Q,   Phi = exp(A_k dt) (or I + A_k dt)
 * Filtering
 *     G = P C^T (C P C^T + R)^-1
 *     x += G (y - C x)
 *     P  = (I - G C) P              (or the Joseph form)
 *
 * A_k is the continuous Jacobian of the model at x_{k|k}. Q is the covariance
 * of the disturbance accumulated over one prediction step; it is not scaled
 * by dt.
 */

#include "soilest/integrator.hpp"
#include "soilest/observability.hpp"
#include "soilest/richards.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace soilest {

/// State transition used by the filter.
class DynamicModel {
public:
    virtual ~DynamicModel() = default;
    [[nodiscard]] virtual Index dimension() const = 0;
    /// x(t + dt) given x(t).
    [[nodiscard]] virtual Eigen::VectorXd propagate(const Eigen::VectorXd& x, double t, double dt) const = 0;
    /// Continuous Jacobian df/dx at (t, x).
    [[nodiscard]] virtual Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& x) const = 0;
};

/// The Richards model advanced by the implicit BDF step.
class RichardsDynamics final : public DynamicModel {
public:
    explicit RichardsDynamics(std::shared_ptr<const RichardsModel> model, StepOptions step = {});

    [[nodiscard]] Index dimension() const override { return model_->dimension(); }
    [[nodiscard]] Eigen::VectorXd propagate(const Eigen::VectorXd& x, double t, double dt) const override;
    [[nodiscard]] Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& x) const override;

    [[nodiscard]] const RichardsModel& model() const noexcept { return *model_; }

private:
    std::shared_ptr<const RichardsModel> model_;
    StepOptions step_;
};

/// dx/dt = A x with the exact flow exp(A dt).
class LinearDynamics final : public DynamicModel {
public:
    explicit LinearDynamics(Eigen::MatrixXd a);

    [[nodiscard]] Index dimension() const override { return a_.rows(); }
    [[nodiscard]] Eigen::VectorXd propagate(const Eigen::VectorXd& x, double t, double dt) const override;
    [[nodiscard]] Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& x) const override;

private:
    Eigen::MatrixXd a_;
};

struct FilterState {
    Eigen::VectorXd x;
    Eigen::MatrixXd P;
    /// Per-step process covariance (N_x x N_x).
    Eigen::MatrixXd Q;
    /// Measurement covariance for the full sensor layout.
    Eigen::MatrixXd R;
};

/// x0 with P = sigma0^2 I, Q = q_std^2 I, R = r_std^2 I (sensors x sensors).
[[nodiscard]] FilterState make_filter_state(const Eigen::VectorXd& x0, double sigma0, double process_std,
                                            double measurement_std, Index sensors);

enum class TransitionMode { exponential, first_order };

struct FilterOptions {
    TransitionMode transition = TransitionMode::exponential;
    bool joseph = false;
    /// Heads outside [min, max] are rejected as implausible [m].
    double plausible_min_m = -100.0;
    double plausible_max_m = 0.1;
};

/// Throws DomainError for dt <= 0 or misshaped state; propagates solver
/// failures.
[[nodiscard]] FilterState predict(const DynamicModel& model, const FilterState& fs, double t, double dt,
                                  const FilterOptions& options = {});

struct UpdateDiagnostics {
    Eigen::VectorXd innovation;
    Eigen::VectorXd innovation_variance; ///< diag(C P C^T + R)
};

/// fs.R must match the layout size. Throws NumericalError naming the sensors
/// involved when C P C^T + R is singular.
[[nodiscard]] FilterState update(const FilterState& fs, const Eigen::VectorXd& y, const SensorLayout& layout,
                                 const FilterOptions& options = {}, UpdateDiagnostics* diagnostics = nullptr);

/// One head reading at one grid node.
struct Observation {
    double time_s = 0.0;
    Index node = 0;
    double head_m = 0.0;
};

struct InnovationRecord {
    double time_s = 0.0;
    Index node = 0;
    double innovation = 0.0;
    double variance = 0.0;
};

struct AssimilationOptions {
    double t0_s = 0.0;
    double horizon_s = 6.0 * 86400.0;
    double dt_s = 720.0;
    FilterOptions filter;
    /// Store diag(P) at every output instant.
    bool keep_covariance_diagonal = true;
};

struct AssimilationResult {
    /// x_{k|k} at t0, t0 + dt, ..., t0 + horizon.
    Trajectory estimate;
    std::vector<Eigen::VectorXd> covariance_diagonal;
    std::vector<InnovationRecord> innovations;
    Index updates = 0;
    Index assimilated = 0;
    Index rejected_implausible = 0;
    Index dropped_duplicates = 0;
    Index dropped_outside_horizon = 0;
};

/// Predicts at every model step and updates at the steps that have data.
/// Readings are aligned to the nearest model step (within half a step);
/// the reading closest in time wins when a node reports twice for one step.
///
/// Preconditions: observations sorted by time and at nodes of the layout.
/// Violations throw ValidationError.
[[nodiscard]] AssimilationResult run_assimilation(const DynamicModel& model, FilterState initial,
                                                  std::span<const Observation> observations,
                                                  const SensorLayout& layout, const AssimilationOptions& options = {});

} // namespace soilest
