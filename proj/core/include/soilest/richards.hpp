#pragma once

/**
 * @file richards.hpp
 * @brief Cylindrical Richards equation on the field grid.
 *
 *   C(h) dh/dt = 1/r d/dr(r K dh/dr) + 1/r^2 d/dtheta(K dh/dtheta)
 *              + d/dz(K (dh/dz + 1)) - S
 *
 * discretised with a conservative cell-centred finite-volume stencil. Fluxes
 * live on faces and are antisymmetric by construction; on a uniform grid the
 * stencil reduces to two-point central differences. Face conductivity is the
 * arithmetic (or geometric) mean of the adjacent cell conductivities.
 *
 * Boundaries:
 *   top     prescribed infiltration flux (irrigation + rain - evaporation)
 *   bottom  free drainage (unit gradient, outflow K(h)) or sealed
 *   axis    no node at r = 0; the inner face has zero area (symmetry)
 *   rim     zero radial flux
 *   azimuth periodic
 */

#include "soilest/grid.hpp"
#include "soilest/integrator.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <numbers>
#include <optional>
#include <vector>

namespace soilest {

enum class BottomBoundary { free_drainage, no_flux };
enum class ConductivityMean { arithmetic, geometric };

struct BoundaryConditions {
    BottomBoundary bottom = BottomBoundary::free_drainage;
};

/// A constant-rate application between start and end [s since scenario start].
struct IrrigationEvent {
    double start_s = 0.0;
    double end_s = 0.0;
    double rate_m_per_s = 0.0;

    friend bool operator==(const IrrigationEvent&, const IrrigationEvent&) = default;
};

/// Rotating centre-pivot: during an event the boom sweeps the field at a
/// constant angular speed and only the sector under it is wetted. The local
/// intensity is the event rate times 2*pi / sector_width, so one revolution
/// delivers the same depth as a uniform application over the same time.
struct PivotSweep {
    double angular_speed_rad_per_s = 0.011 / 50.0;
    double sector_width_rad = 2.0 * std::numbers::pi / 40.0;
    double start_angle_rad = 0.0;

    friend bool operator==(const PivotSweep&, const PivotSweep&) = default;
};

/// Events are active on (start, end].
class IrrigationSchedule {
public:
    IrrigationSchedule() = default;
    /// Events are sorted by start; throws ValidationError on overlaps,
    /// negative rates or end < start.
    explicit IrrigationSchedule(std::vector<IrrigationEvent> events, std::optional<PivotSweep> pivot = std::nullopt);

    /// rate_m_per_s applied from start_of_day_s to start_of_day_s + duration_s
    /// on each of `days` consecutive days.
    static IrrigationSchedule daily(double rate_m_per_s, double start_of_day_s, double duration_s, int days);

    /// Field-average rate at t (the active event's rate, or 0).
    [[nodiscard]] double field_rate(double t) const noexcept;
    /// Rate at a surface location. Equal to field_rate unless a pivot sweep
    /// is configured.
    [[nodiscard]] double local_rate(double t, double azimuth) const noexcept;
    /// First event start or end strictly after `after` (infinity if none).
    [[nodiscard]] double next_switch(double after) const noexcept;
    /// Boom angle in [0, 2*pi) during an event, if a pivot sweep is configured.
    [[nodiscard]] std::optional<double> pivot_angle(double t) const noexcept;

    [[nodiscard]] const std::vector<IrrigationEvent>& events() const noexcept { return events_; }
    [[nodiscard]] const std::optional<PivotSweep>& pivot() const noexcept { return pivot_; }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }

    friend bool operator==(const IrrigationSchedule&, const IrrigationSchedule&) = default;

private:
    [[nodiscard]] const IrrigationEvent* active(double t) const noexcept;

    std::vector<IrrigationEvent> events_;
    std::optional<PivotSweep> pivot_;
};

/// Surface forcing. Evaporation is folded into the top flux as a signed net
/// term, so the infiltration flux can become negative.
struct Forcing {
    IrrigationSchedule irrigation;
    IrrigationSchedule rain;
    double evaporation_m_per_s = 0.0;

    /// Net downward flux into the top face at the given azimuth [m/s].
    [[nodiscard]] double top_flux(double t, double azimuth) const noexcept {
        return irrigation.local_rate(t, azimuth) + rain.field_rate(t) - evaporation_m_per_s;
    }
};

/// Root water uptake S [1/s] (volume extracted per unit soil volume). The
/// extraction must not depend on the state: the solver's Jacobian treats S as
/// a forcing.
class SinkModel {
public:
    virtual ~SinkModel() = default;
    [[nodiscard]] virtual double rate(double t, Index node) const = 0;
};

/// Time-invariant per-node uptake.
class SinkField final : public SinkModel {
public:
    /// Throws ValidationError for negative or non-finite rates.
    explicit SinkField(std::vector<double> rates);

    /// `rate` at every node whose centre lies at most root_depth_m below the
    /// surface, zero elsewhere.
    static SinkField root_zone(const CylindricalGrid& grid, double rate, double root_depth_m);

    [[nodiscard]] double rate(double t, Index node) const override;

private:
    std::vector<double> rates_;
};

/// Constant K and C in place of the van Genuchten relations. Turns the model
/// into linear diffusion (plus gravity), for verification.
struct LinearTestMode {
    double conductivity = 1e-6;
    double capacity = 0.1;
};

struct ModelOptions {
    ConductivityMean mean = ConductivityMean::arithmetic;
    /// Lower bound on C(h) wherever it divides the flux balance [1/m].
    double capacity_floor = 1e-7;
    bool gravity = true;
    std::optional<LinearTestMode> linear;
};

class RichardsModel final : public OdeSystem {
public:
    struct Face {
        Index a = 0;
        Index b = 0;
        double transmissibility = 0.0; ///< area / distance [m]
        double gravity_area = 0.0;     ///< face area if b lies above a, else 0 [m2]
    };

    RichardsModel(CylindricalGrid grid, ParameterField params, BoundaryConditions bc = {}, Forcing forcing = {},
                  std::shared_ptr<const SinkModel> sink = nullptr, ModelOptions options = {});

    [[nodiscard]] Index dimension() const override { return grid_.size(); }

    /// dh/dt at every node. Throws IntegrationError naming the first
    /// non-finite node.
    [[nodiscard]] Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x) const override;
    /// d(rhs)/dh, at most 7 non-zeros per row.
    [[nodiscard]] Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& x) const override;
    void evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd* rhs,
                  Eigen::SparseMatrix<double>* jacobian) const;

    /// Implicit stages are solved for cell water volume V*theta(h), so the
    /// discrete water budget closes exactly and saturated cells (where the
    /// capacity vanishes) do not stall Newton.
    [[nodiscard]] bool has_storage_form() const override { return true; }
    /// Irrigation and rain switch on and off at their event boundaries.
    [[nodiscard]] double next_discontinuity(double t_from, double t_to) const override;
    /// V*theta(h) and V*C(h), the latter with the capacity floor.
    void storage(const Eigen::VectorXd& x, Eigen::VectorXd& m, Eigen::VectorXd& dm) const override;
    /// Net volumetric inflow [m3/s] and its Jacobian.
    void flux(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g,
              Eigen::SparseMatrix<double>* dg) const override;

    /// Volumetric flux across a face from a to b [m3/s].
    [[nodiscard]] double face_flux(const Face& face, const Eigen::VectorXd& x) const;
    /// Net volumetric inflow into every cell [m3/s], sink included.
    [[nodiscard]] Eigen::VectorXd net_inflow(double t, const Eigen::VectorXd& x) const;

    [[nodiscard]] Eigen::VectorXd water_content(const Eigen::VectorXd& x) const;
    /// Sum of theta * cell volume [m3].
    [[nodiscard]] double total_water(const Eigen::VectorXd& x) const;

    [[nodiscard]] const CylindricalGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const ParameterField& parameters() const noexcept { return params_; }
    [[nodiscard]] const BoundaryConditions& boundary() const noexcept { return bc_; }
    [[nodiscard]] const Forcing& forcing() const noexcept { return forcing_; }
    [[nodiscard]] const ModelOptions& options() const noexcept { return options_; }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }

private:
    struct NodeState {
        double k = 0.0;
        double dk = 0.0;
        double c = 0.0;
        double dc = 0.0;
    };
    void node_states(const Eigen::VectorXd& x, std::vector<NodeState>& out) const;
    void assemble(double t, const Eigen::VectorXd& x, const std::vector<NodeState>& st, Eigen::VectorXd& net,
                  std::vector<Eigen::Triplet<double>>* triplets) const;
    [[nodiscard]] double face_conductivity(double ka, double kb) const noexcept;

    CylindricalGrid grid_;
    ParameterField params_;
    BoundaryConditions bc_;
    Forcing forcing_;
    std::shared_ptr<const SinkModel> sink_;
    ModelOptions options_;
    std::vector<Face> faces_;
    std::vector<double> volume_;
    std::vector<double> top_area_;
    std::vector<double> azimuth_;
};

/// theta at every node for every state of a trajectory.
[[nodiscard]] Trajectory water_content_trajectory(const RichardsModel& model, const Trajectory& heads);

/// h = total_head - z: the zero-flux equilibrium under sealed boundaries.
[[nodiscard]] Eigen::VectorXd hydrostatic_state(const CylindricalGrid& grid, double total_head);

} // namespace soilest
