#include "soilest/observability.hpp"

#include "soilest/error.hpp"
#include "soilest/matrix_exponential.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <cmath>
#include <numeric>
#include <sstream>

namespace soilest {

Eigen::MatrixXd discretize_jacobian(const Eigen::MatrixXd& a, double sampling_period_s) {
    if (!(sampling_period_s > 0.0) || !std::isfinite(sampling_period_s)) {
        throw DomainError("sampling period must be positive and finite");
    }
    return expm(a * sampling_period_s);
}

namespace {

Eigen::VectorXd degree_from(const Eigen::VectorXcd& lambda, const Eigen::MatrixXcd& vectors) {
    const Index n = lambda.size();
    Eigen::VectorXd weight(n);
    for (Index j = 0; j < n; ++j) {
        weight(j) = 1.0 - std::norm(lambda(j));
    }
    Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
        const double norm = vectors.col(j).norm();
        const double scale = norm > 0.0 ? 1.0 / (norm * norm) : 0.0;
        for (Index i = 0; i < n; ++i) {
            degree(i) += weight(j) * std::norm(vectors(i, j)) * scale;
        }
    }
    return degree;
}

} // namespace

ModalDegree modal_degree_detailed(const Eigen::MatrixXd& ad, const ModalDegreeOptions& options) {
    if (ad.rows() != ad.cols()) {
        throw DomainError("modal degree needs a square matrix");
    }
    if (!ad.allFinite()) {
        throw DomainError("modal degree: non-finite matrix entries");
    }
    ModalDegree out;
    if (ad.size() == 0) {
        out.degree.resize(0);
        return out;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> eig(ad, true);
    if (eig.info() == Eigen::Success) {
        const Eigen::MatrixXcd v = eig.eigenvectors();
        out.eigenvector_rcond = Eigen::PartialPivLU<Eigen::MatrixXcd>(v).rcond();
        if (std::isfinite(out.eigenvector_rcond) && out.eigenvector_rcond >= options.rcond_threshold) {
            out.degree = degree_from(eig.eigenvalues(), v);
            return out;
        }
    }
    // Near-defective (or failed) eigendecomposition: the unitary Schur
    // vectors with the triangular diagonal stand in for the eigenpairs.
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(ad.cast<std::complex<double>>());
    if (schur.info() != Eigen::Success) {
        throw NumericalError("modal degree: Schur decomposition did not converge");
    }
    out.schur_fallback = true;
    std::ostringstream msg;
    msg << "eigenvector matrix near-defective (rcond " << out.eigenvector_rcond
        << "); Schur vectors used as pseudo-eigenvectors";
    out.warnings.push_back(msg.str());
    out.degree = degree_from(schur.matrixT().diagonal(), schur.matrixU());
    return out;
}

Eigen::VectorXd modal_degree(const Eigen::MatrixXd& ad, const ModalDegreeOptions& options) {
    return modal_degree_detailed(ad, options).degree;
}

namespace {

std::vector<Index> resolve_candidates(const std::vector<Index>& requested, Index n) {
    std::vector<Index> out = requested;
    if (out.empty()) {
        out.resize(static_cast<std::size_t>(n));
        std::iota(out.begin(), out.end(), Index{0});
        return out;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.front() < 0 || out.back() >= n) {
        throw ValidationError("candidate node outside [0, " + std::to_string(n) + ")");
    }
    return out;
}

void finish_report(ObservabilityReport& report, Index n) {
    report.average = Eigen::VectorXd::Zero(n);
    for (const auto& s : report.snapshots) {
        report.average += s;
    }
    report.average /= static_cast<double>(report.snapshots.size());
    report.ranking = report.candidates;
    const Eigen::VectorXd& avg = report.average;
    std::stable_sort(report.ranking.begin(), report.ranking.end(), [&avg](Index a, Index b) {
        if (avg(a) != avg(b)) {
            return avg(a) > avg(b);
        }
        return a < b;
    });
}

} // namespace

ObservabilityReport rank_nodes(const OdeSystem& system, const Trajectory& trajectory, double sampling_period_s,
                               const RankOptions& options) {
    if (trajectory.states.empty()) {
        throw ValidationError("observability ranking needs at least one snapshot");
    }
    if (options.snapshot_stride < 1) {
        throw ValidationError("snapshot stride must be >= 1");
    }
    const Index n = system.dimension();
    ObservabilityReport report;
    report.sampling_period_s = sampling_period_s;
    report.candidates = resolve_candidates(options.candidates, n);
    std::vector<std::size_t> picks;
    for (std::size_t k = 0; k < trajectory.states.size(); k += static_cast<std::size_t>(options.snapshot_stride)) {
        picks.push_back(k);
    }
    std::vector<ModalDegree> results(picks.size());
    std::vector<std::exception_ptr> errors(picks.size());
    auto work = [&](std::size_t slot) {
        try {
            const std::size_t k = picks[slot];
            const Eigen::MatrixXd a = Eigen::MatrixXd(system.jacobian(trajectory.times[k], trajectory.states[k]));
            results[slot] = modal_degree_detailed(discretize_jacobian(a, sampling_period_s), options.modal);
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp(options.jobs, 1, 256));
    if (workers == 1 || picks.size() < 2) {
        for (std::size_t slot = 0; slot < picks.size(); ++slot) work(slot);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, picks.size()); ++w) {
            pool.emplace_back([&] {
                for (std::size_t slot = next++; slot < picks.size(); slot = next++) work(slot);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t slot = 0; slot < picks.size(); ++slot) {
        if (errors[slot]) std::rethrow_exception(errors[slot]);
        const double t = trajectory.times[picks[slot]];
        for (auto& w : results[slot].warnings) {
            report.warnings.push_back("t=" + std::to_string(t) + ": " + w);
        }
        report.snapshots.push_back(std::move(results[slot].degree));
        report.snapshot_times.push_back(t);
    }
    finish_report(report, n);
    return report;
}

ObservabilityReport rank_discrete(std::span<const Eigen::MatrixXd> discrete, std::span<const double> times,
                                  double sampling_period_s, const RankOptions& options) {
    if (discrete.empty()) {
        throw ValidationError("observability ranking needs at least one snapshot");
    }
    if (times.size() != discrete.size()) {
        throw ValidationError("one time per snapshot required");
    }
    const Index n = discrete.front().rows();
    ObservabilityReport report;
    report.sampling_period_s = sampling_period_s;
    report.candidates = resolve_candidates(options.candidates, n);
    for (std::size_t k = 0; k < discrete.size(); ++k) {
        if (discrete[k].rows() != n) {
            throw DomainError("snapshot matrices differ in size");
        }
        ModalDegree md = modal_degree_detailed(discrete[k], options.modal);
        report.warnings.insert(report.warnings.end(), md.warnings.begin(), md.warnings.end());
        report.snapshots.push_back(std::move(md.degree));
        report.snapshot_times.push_back(times[k]);
    }
    finish_report(report, n);
    return report;
}

// --- SensorLayout -----------------------------------------------------------

SensorLayout::SensorLayout(std::vector<Index> nodes, Index state_dimension)
    : nodes_(std::move(nodes)), state_dimension_(state_dimension) {
    std::vector<std::string> issues;
    std::vector<Index> sorted = nodes_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= state_dimension_) {
            issues.push_back("sensor node " + std::to_string(sorted[i]) + " outside [0, " +
                             std::to_string(state_dimension_) + ")");
        }
        if (i > 0 && sorted[i] == sorted[i - 1]) {
            issues.push_back("sensor node " + std::to_string(sorted[i]) + " listed twice");
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

Eigen::SparseMatrix<double> SensorLayout::selection_matrix() const {
    Eigen::SparseMatrix<double> c(size(), state_dimension_);
    std::vector<Eigen::Triplet<double>> t;
    for (Index s = 0; s < size(); ++s) {
        t.emplace_back(s, nodes_[static_cast<std::size_t>(s)], 1.0);
    }
    c.setFromTriplets(t.begin(), t.end());
    return c;
}

Eigen::VectorXd SensorLayout::measure(const Eigen::VectorXd& x) const {
    if (x.size() != state_dimension_) {
        throw DomainError("state length does not match the sensor layout");
    }
    Eigen::VectorXd y(size());
    for (Index s = 0; s < size(); ++s) {
        y(s) = x(nodes_[static_cast<std::size_t>(s)]);
    }
    return y;
}

Index SensorLayout::position_of(Index node) const noexcept {
    const auto it = std::find(nodes_.begin(), nodes_.end(), node);
    return it == nodes_.end() ? Index{-1} : static_cast<Index>(it - nodes_.begin());
}

namespace {

SensorSelection take(const ObservabilityReport& report, Index k, bool highest) {
    const auto available = static_cast<Index>(report.ranking.size());
    if (k <= 0) {
        throw ValidationError("sensor count must be >= 1");
    }
    if (k > available) {
        throw ValidationError("requested " + std::to_string(k) + " sensors but only " + std::to_string(available) +
                              " candidates exist");
    }
    std::vector<Index> nodes;
    nodes.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
        const Index pos = highest ? i : available - 1 - i;
        nodes.push_back(report.ranking[static_cast<std::size_t>(pos)]);
    }
    SensorSelection out;
    for (Index node : nodes) {
        out.group_sum += report.average(node);
    }
    out.layout = SensorLayout(std::move(nodes), report.average.size());
    return out;
}

} // namespace

SensorSelection select_sensors(const ObservabilityReport& report, Index k) { return take(report, k, true); }

SensorSelection select_lowest(const ObservabilityReport& report, Index k) { return take(report, k, false); }

} // namespace soilest
