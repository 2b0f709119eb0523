#pragma once

/**
 * @file observability.hpp
 * @brief Modal degree of observability and sensor ranking.
 *
 * For a discrete-time linearisation A_d = exp(A T) with eigenpairs
 * (lambda_j, v_j), the modal degree of observability of state i is
 *
 *     O_i = sum_j (1 - |lambda_j|^2) |v_ij|^2,
 *
 * with every eigenvector scaled to unit Euclidean norm. Along a trajectory
 * O_i is averaged over the snapshots and nodes are ranked by the average.
 */

#include "soilest/grid.hpp"
#include "soilest/integrator.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <string>
#include <vector>

namespace soilest {

/// exp(A T). Throws DomainError for T <= 0, non-square or non-finite A.
[[nodiscard]] Eigen::MatrixXd discretize_jacobian(const Eigen::MatrixXd& a, double sampling_period_s);

struct ModalDegreeOptions {
    /// Below this reciprocal condition number (1-norm estimate) the
    /// eigenvector matrix counts as near-defective and the Schur fallback is
    /// used.
    double rcond_threshold = 1e-12;
};

struct ModalDegree {
    Eigen::VectorXd degree;
    /// Reciprocal condition estimate of the eigenvector matrix.
    double eigenvector_rcond = 1.0;
    /// True when the unitary Schur vectors replaced the eigenvectors.
    bool schur_fallback = false;
    std::vector<std::string> warnings;
};

/// Throws DomainError for non-square or non-finite input.
[[nodiscard]] ModalDegree modal_degree_detailed(const Eigen::MatrixXd& ad, const ModalDegreeOptions& options = {});
[[nodiscard]] Eigen::VectorXd modal_degree(const Eigen::MatrixXd& ad, const ModalDegreeOptions& options = {});

struct ObservabilityReport {
    /// Node indices considered for placement (ascending).
    std::vector<Index> candidates;
    /// Average degree of every state over the snapshots (all N_x nodes).
    Eigen::VectorXd average;
    /// Per-snapshot degree of every state.
    std::vector<Eigen::VectorXd> snapshots;
    std::vector<double> snapshot_times;
    /// Candidates ordered by descending average degree; ties broken by
    /// ascending node index.
    std::vector<Index> ranking;
    double sampling_period_s = 0.0;
    std::vector<std::string> warnings;
};

struct RankOptions {
    /// Use every stride-th state of the trajectory.
    int snapshot_stride = 1;
    /// Empty means every node.
    std::vector<Index> candidates;
    ModalDegreeOptions modal;
    /// Worker threads for the per-snapshot eigendecompositions.
    int jobs = 1;
};

/// Ranks candidate nodes from the system Jacobian evaluated along a
/// trajectory (the operating points).
[[nodiscard]] ObservabilityReport rank_nodes(const OdeSystem& system, const Trajectory& trajectory,
                                             double sampling_period_s, const RankOptions& options = {});

/// Same ranking from already discretised matrices.
[[nodiscard]] ObservabilityReport rank_discrete(std::span<const Eigen::MatrixXd> discrete, std::span<const double> times,
                                                double sampling_period_s, const RankOptions& options = {});

/// Ordered set of measured nodes. Row s of the selection matrix C has a
/// single 1 in column nodes()[s].
class SensorLayout {
public:
    SensorLayout() = default;
    /// Throws ValidationError for duplicates or nodes outside [0, state_dim).
    SensorLayout(std::vector<Index> nodes, Index state_dimension);

    [[nodiscard]] const std::vector<Index>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(nodes_.size()); }
    [[nodiscard]] Index state_dimension() const noexcept { return state_dimension_; }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }

    [[nodiscard]] Eigen::SparseMatrix<double> selection_matrix() const;
    /// C x.
    [[nodiscard]] Eigen::VectorXd measure(const Eigen::VectorXd& x) const;
    /// Position of a node in the layout, or -1.
    [[nodiscard]] Index position_of(Index node) const noexcept;

    friend bool operator==(const SensorLayout&, const SensorLayout&) = default;

private:
    std::vector<Index> nodes_;
    Index state_dimension_ = 0;
};

struct SensorSelection {
    SensorLayout layout;
    /// Sum of the selected nodes' average degrees. A plain aggregate for
    /// comparing layouts, not a system-level observability measure.
    double group_sum = 0.0;
};

/// The k highest-ranked candidates. Throws ValidationError for k = 0 or
/// k > candidate count.
[[nodiscard]] SensorSelection select_sensors(const ObservabilityReport& report, Index k);
/// The k lowest-ranked candidates (the reference "poor" layout).
[[nodiscard]] SensorSelection select_lowest(const ObservabilityReport& report, Index k);

} // namespace soilest
