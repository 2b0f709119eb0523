#include "soilest/ekf.hpp"

#include "soilest/error.hpp"
#include "soilest/matrix_exponential.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace soilest {

RichardsDynamics::RichardsDynamics(std::shared_ptr<const RichardsModel> model, StepOptions step)
    : model_(std::move(model)), step_(step) {
    if (!model_) {
        throw ValidationError("RichardsDynamics needs a model");
    }
}

Eigen::VectorXd RichardsDynamics::propagate(const Eigen::VectorXd& x, double t, double dt) const {
    return step(*model_, x, t, dt, step_);
}

Eigen::SparseMatrix<double> RichardsDynamics::jacobian(double t, const Eigen::VectorXd& x) const {
    return model_->jacobian(t, x);
}

LinearDynamics::LinearDynamics(Eigen::MatrixXd a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || !a_.allFinite()) {
        throw DomainError("linear dynamics need a square, finite matrix");
    }
}

Eigen::VectorXd LinearDynamics::propagate(const Eigen::VectorXd& x, double /*t*/, double dt) const {
    return expm(a_ * dt) * x;
}

Eigen::SparseMatrix<double> LinearDynamics::jacobian(double /*t*/, const Eigen::VectorXd& /*x*/) const {
    return a_.sparseView();
}

FilterState make_filter_state(const Eigen::VectorXd& x0, double sigma0, double process_std, double measurement_std,
                              Index sensors) {
    const Index n = x0.size();
    FilterState fs;
    fs.x = x0;
    fs.P = Eigen::MatrixXd::Identity(n, n) * (sigma0 * sigma0);
    fs.Q = Eigen::MatrixXd::Identity(n, n) * (process_std * process_std);
    fs.R = Eigen::MatrixXd::Identity(sensors, sensors) * (measurement_std * measurement_std);
    return fs;
}

namespace {

void symmetrize(Eigen::MatrixXd& p) {
    p = 0.5 * (p + p.transpose()).eval();
}

void check_shapes(const FilterState& fs, Index n) {
    if (fs.x.size() != n || fs.P.rows() != n || fs.P.cols() != n || fs.Q.rows() != n || fs.Q.cols() != n) {
        throw DomainError("filter state dimensions do not match the model (" + std::to_string(n) + ")");
    }
}

} // namespace

FilterState predict(const DynamicModel& model, const FilterState& fs, double t, double dt,
                    const FilterOptions& options) {
    if (!(dt > 0.0)) {
        throw DomainError("prediction step needs dt > 0");
    }
    check_shapes(fs, model.dimension());
    const Eigen::SparseMatrix<double> a = model.jacobian(t, fs.x);

    FilterState out = fs;
    out.x = model.propagate(fs.x, t, dt);
    if (options.transition == TransitionMode::exponential) {
        // Phi P Phi^T = (Phi (Phi P)^T)^T without forming Phi.
        const Eigen::MatrixXd phi_p = expm_multiply(a, fs.P, dt);
        out.P = expm_multiply(a, phi_p.transpose(), dt).transpose();
    } else {
        const Eigen::MatrixXd ap = a * fs.P;
        out.P = fs.P + dt * (ap + ap.transpose()) + (dt * dt) * (a * ap.transpose()).transpose();
    }
    out.P += fs.Q;
    symmetrize(out.P);
    if (!out.P.allFinite()) {
        throw NumericalError("covariance propagation over [" + std::to_string(t) + ", " + std::to_string(t + dt) +
                             "] s produced non-finite entries; the linearisation has diverged (a smaller "
                             "initial standard deviation usually helps)");
    }
    return out;
}

FilterState update(const FilterState& fs, const Eigen::VectorXd& y, const SensorLayout& layout,
                   const FilterOptions& options, UpdateDiagnostics* diagnostics) {
    const Index n = fs.x.size();
    const Index m = layout.size();
    if (layout.state_dimension() != n || fs.P.rows() != n) {
        throw DomainError("sensor layout does not match the filter state");
    }
    if (y.size() != m || fs.R.rows() != m || fs.R.cols() != m) {
        throw DomainError("measurement vector and R must match the layout size " + std::to_string(m));
    }
    if (m == 0) {
        return fs;
    }
    const auto& nodes = layout.nodes();

    Eigen::MatrixXd pct(n, m); // P C^T
    for (Index s = 0; s < m; ++s) {
        pct.col(s) = fs.P.col(nodes[static_cast<std::size_t>(s)]);
    }
    Eigen::MatrixXd s_mat(m, m); // C P C^T + R
    for (Index s = 0; s < m; ++s) {
        s_mat.row(s) = pct.row(nodes[static_cast<std::size_t>(s)]);
    }
    s_mat += fs.R;
    s_mat = 0.5 * (s_mat + s_mat.transpose()).eval();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(s_mat);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible() || !s_mat.allFinite()) {
        std::ostringstream msg;
        msg << "singular innovation covariance; sensors at nodes";
        const Eigen::MatrixXd kernel = lu.kernel();
        for (Index s = 0; s < m; ++s) {
            const bool involved = kernel.cols() == 0 || kernel.row(s).cwiseAbs().maxCoeff() > 1e-8;
            if (involved) {
                msg << ' ' << nodes[static_cast<std::size_t>(s)];
            }
        }
        throw NumericalError(msg.str());
    }

    const Eigen::VectorXd innovation = y - layout.measure(fs.x);
    // G = P C^T S^-1 ;  G^T = S^-1 (P C^T)^T because S is symmetric.
    const Eigen::MatrixXd gain = lu.solve(pct.transpose()).transpose();

    FilterState out = fs;
    out.x = fs.x + gain * innovation;
    if (options.joseph) {
        const Eigen::MatrixXd gpc = gain * pct.transpose(); // G C P
        out.P = fs.P - gpc - gpc.transpose() + gain * s_mat * gain.transpose();
    } else {
        out.P = fs.P - gain * pct.transpose();
    }
    symmetrize(out.P);
    if (diagnostics != nullptr) {
        diagnostics->innovation = innovation;
        diagnostics->innovation_variance = s_mat.diagonal();
    }
    return out;
}

AssimilationResult run_assimilation(const DynamicModel& model, FilterState initial,
                                    std::span<const Observation> observations, const SensorLayout& layout,
                                    const AssimilationOptions& options) {
    if (!(options.dt_s > 0.0) || !(options.horizon_s >= 0.0)) {
        throw ValidationError("assimilation needs dt > 0 and a non-negative horizon");
    }
    check_shapes(initial, model.dimension());
    if (initial.R.rows() != layout.size()) {
        throw ValidationError("R must be sized to the sensor layout");
    }
    const auto steps = static_cast<long>(std::llround(options.horizon_s / options.dt_s));

    AssimilationResult result;
    // step -> (layout position -> (|time offset|, value))
    std::map<long, std::map<Index, std::pair<double, double>>> frames;
    double previous_time = -std::numeric_limits<double>::infinity();
    for (const Observation& o : observations) {
        if (o.time_s < previous_time) {
            throw ValidationError("observations are not sorted by time (t=" + std::to_string(o.time_s) + ")");
        }
        previous_time = o.time_s;
        const Index pos = layout.position_of(o.node);
        if (pos < 0) {
            throw ValidationError("observation at node " + std::to_string(o.node) + " is not in the sensor layout");
        }
        if (o.time_s < options.t0_s - 0.5 * options.dt_s) {
            throw ValidationError("observation at t=" + std::to_string(o.time_s) + " precedes the filter start");
        }
        const long k = std::lround((o.time_s - options.t0_s) / options.dt_s);
        if (k > steps) {
            ++result.dropped_outside_horizon;
            continue;
        }
        if (!std::isfinite(o.head_m) || o.head_m < options.filter.plausible_min_m ||
            o.head_m > options.filter.plausible_max_m) {
            ++result.rejected_implausible;
            continue;
        }
        const double offset = std::abs(o.time_s - (options.t0_s + k * options.dt_s));
        auto& frame = frames[k];
        auto it = frame.find(pos);
        if (it == frame.end()) {
            frame.emplace(pos, std::make_pair(offset, o.head_m));
        } else {
            ++result.dropped_duplicates;
            if (offset < it->second.first) {
                it->second = {offset, o.head_m};
            }
        }
    }

    FilterState fs = std::move(initial);
    auto assimilate = [&](long k) {
        const auto it = frames.find(k);
        if (it == frames.end()) {
            return;
        }
        const double t = options.t0_s + k * options.dt_s;
        std::vector<Index> nodes;
        std::vector<Index> positions;
        Eigen::VectorXd y(static_cast<Index>(it->second.size()));
        for (const auto& [pos, reading] : it->second) {
            y(static_cast<Index>(nodes.size())) = reading.second;
            nodes.push_back(layout.nodes()[static_cast<std::size_t>(pos)]);
            positions.push_back(pos);
        }
        const auto m = static_cast<Index>(positions.size());
        FilterState sub = std::move(fs);
        const Eigen::MatrixXd full_r = sub.R;
        sub.R.resize(m, m);
        for (Index a = 0; a < m; ++a) {
            for (Index b = 0; b < m; ++b) {
                sub.R(a, b) = full_r(positions[static_cast<std::size_t>(a)], positions[static_cast<std::size_t>(b)]);
            }
        }
        UpdateDiagnostics diag;
        fs = update(sub, y, SensorLayout(nodes, layout.state_dimension()), options.filter, &diag);
        fs.R = full_r;
        ++result.updates;
        result.assimilated += m;
        for (Index s = 0; s < m; ++s) {
            result.innovations.push_back({t, nodes[static_cast<std::size_t>(s)], diag.innovation(s),
                                          diag.innovation_variance(s)});
        }
    };

    auto record = [&](long k) {
        result.estimate.times.push_back(options.t0_s + k * options.dt_s);
        result.estimate.states.push_back(fs.x);
        if (options.keep_covariance_diagonal) {
            result.covariance_diagonal.push_back(fs.P.diagonal());
        }
    };

    assimilate(0);
    record(0);
    for (long k = 1; k <= steps; ++k) {
        const double t = options.t0_s + (k - 1) * options.dt_s;
        fs = predict(model, fs, t, options.dt_s, options.filter);
        assimilate(k);
        record(k);
    }
    return result;
}

} // namespace soilest
