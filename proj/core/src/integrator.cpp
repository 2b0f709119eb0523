#include "soilest/integrator.hpp"

#include "soilest/error.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace soilest {

void OdeSystem::storage(const Eigen::VectorXd& x, Eigen::VectorXd& m, Eigen::VectorXd& dm) const {
    m = x;
    dm = Eigen::VectorXd::Ones(x.size());
}

void OdeSystem::flux(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::SparseMatrix<double>* dg) const {
    g = rhs(t, x);
    if (dg != nullptr) {
        *dg = jacobian(t, x);
    }
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double last_update = 0.0;
};

/// Residual of one implicit stage, m(y) - psi - beta*h*g(t1, y), and
/// optionally its Jacobian.
class StageResidual {
public:
    StageResidual(const OdeSystem& system, const Eigen::VectorXd& psi, double beta_h, double t1)
        : system_(system), psi_(psi), beta_h_(beta_h), t1_(t1), storage_form_(system.has_storage_form()) {}

    Eigen::VectorXd operator()(const Eigen::VectorXd& y, SparseMatrix* jac) const {
        const Eigen::Index n = y.size();
        Eigen::VectorXd stored = y;
        Eigen::VectorXd d_stored = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd g;
        SparseMatrix dg;
        if (storage_form_) {
            system_.storage(y, stored, d_stored);
            system_.flux(t1_, y, g, jac != nullptr ? &dg : nullptr);
        } else {
            g = system_.rhs(t1_, y);
            if (jac != nullptr) {
                dg = system_.jacobian(t1_, y);
            }
        }
        if (jac != nullptr) {
            SparseMatrix diag(n, n);
            diag.reserve(Eigen::VectorXi::Constant(n, 1));
            for (Eigen::Index i = 0; i < n; ++i) {
                diag.insert(i, i) = d_stored(i);
            }
            *jac = diag - beta_h_ * dg;
            jac->makeCompressed();
        }
        return stored - psi_ - beta_h_ * g;
    }

private:
    const OdeSystem& system_;
    const Eigen::VectorXd& psi_;
    double beta_h_;
    double t1_;
    bool storage_form_;
};

/// Solves m(y) - psi - beta*h*g(t1, y) = 0 starting from guess, where m is
/// the identity unless the system has a storage form. Full Newton steps are
/// backtracked until the residual norm decreases; this matters where a cell
/// crosses into saturation and the storage derivative jumps.
NewtonOutcome newton_solve(const OdeSystem& system, Eigen::VectorXd& y, const Eigen::VectorXd& psi, double beta,
                           double h, double t1, const StepOptions& options, Eigen::SparseLU<SparseMatrix>& lu,
                           bool& pattern_ready) {
    NewtonOutcome out;
    const StageResidual residual_of(system, psi, beta * h, t1);
    double first_update = 0.0;
    SparseMatrix m;
    for (int it = 0; it < options.max_newton_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::VectorXd residual = residual_of(y, &m);
        if (!pattern_ready) {
            lu.analyzePattern(m);
            pattern_ready = true;
        }
        lu.factorize(m);
        if (lu.info() != Eigen::Success) {
            return out;
        }
        const Eigen::VectorXd delta = lu.solve(residual);
        if (!delta.allFinite()) {
            return out;
        }
        out.last_update = delta.cwiseAbs().maxCoeff();
        const bool small = out.last_update <= options.abs_tol + options.rel_tol * y.cwiseAbs().maxCoeff();

        double lambda = 1.0;
        if (!small) {
            const double r0 = residual.norm();
            for (int back = 0; back < options.max_backtracks; ++back) {
                Eigen::VectorXd trial = y - lambda * delta;
                bool ok = true;
                double r1 = 0.0;
                try {
                    r1 = residual_of(trial, nullptr).norm();
                } catch (const Error&) {
                    ok = false;
                }
                if (ok && std::isfinite(r1) && r1 <= (1.0 - 1e-4 * lambda) * r0) {
                    break;
                }
                lambda *= 0.5;
            }
        }
        y -= lambda * delta;
        if (it == 0) {
            first_update = out.last_update;
        } else if (out.last_update > 1e3 * std::max(first_update, options.abs_tol)) {
            return out; // diverging
        }
        if (small) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

} // namespace

Eigen::VectorXd step(const OdeSystem& system, const Eigen::VectorXd& x, double t, double dt,
                     const StepOptions& options, StepStats* stats) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("step size must be positive and finite");
    }
    if (x.size() != system.dimension()) {
        throw DomainError("state length does not match the system dimension");
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i))) {
            throw IntegrationError("non-finite state entry at node " + std::to_string(i), static_cast<long>(i));
        }
    }
    if (options.order != 1 && options.order != 2) {
        throw DomainError("integrator order must be 1 or 2");
    }

    const int nominal_pieces = std::max(1, static_cast<int>(std::ceil(dt / options.max_substep_s - 1e-12)));
    const double nominal = dt / nominal_pieces;
    const double t_end = t + dt;

    StepStats local;
    local.smallest_substep_s = nominal;
    Eigen::SparseLU<SparseMatrix> lu;
    bool pattern_ready = false;

    const bool storage_form = system.has_storage_form();
    auto stored = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        if (!storage_form) {
            return v;
        }
        Eigen::VectorXd m;
        Eigen::VectorXd dm;
        system.storage(v, m, dm);
        return m;
    };

    Eigen::VectorXd y = x;
    Eigen::VectorXd y_prev;
    double h_prev = 0.0;
    bool have_prev = false;
    double t_cur = t;
    double h = nominal;
    int successes_since_halving = 0;
    int halvings = 0;

    while (t_end - t_cur > 1e-12 * std::max(1.0, std::abs(t_end))) {
        double h_try = std::min(h, t_end - t_cur);
        const double jump = system.next_discontinuity(t_cur, t_cur + h_try);
        if (jump - t_cur > 1e-9 * std::max(1.0, std::abs(t_cur)) && jump < t_cur + h_try) {
            h_try = jump - t_cur;
        }
        Eigen::VectorXd psi;
        double beta = 1.0;
        Eigen::VectorXd guess = y;
        // Variable-step BDF2 is zero-stable only for step ratios below
        // 1 + sqrt(2); after a short sub-step (cut at a forcing jump) restart
        // with backward Euler instead.
        if (options.order == 2 && have_prev && h_try / h_prev < 2.4) {
            const double w = h_try / h_prev;
            const double denom = 1.0 + 2.0 * w;
            psi = ((1.0 + w) * (1.0 + w) / denom) * stored(y) - (w * w / denom) * stored(y_prev);
            beta = (1.0 + w) / denom;
            guess = y + w * (y - y_prev);
        } else {
            psi = stored(y);
        }

        const NewtonOutcome outcome =
            newton_solve(system, guess, psi, beta, h_try, t_cur + h_try, options, lu, pattern_ready);
        local.newton_iterations += outcome.iterations;
        if (!outcome.converged) {
            ++halvings;
            ++local.halvings;
            if (halvings > options.max_halvings) {
                std::ostringstream msg;
                msg << "Newton iteration failed at t=" << t_cur << " s with sub-step " << h_try
                    << " s after " << local.halvings << " halvings (last update norm " << outcome.last_update
                    << ")";
                throw StepFailure(msg.str());
            }
            h = h_try * 0.5;
            local.smallest_substep_s = std::min(local.smallest_substep_s, h);
            successes_since_halving = 0;
            continue;
        }
        y_prev = y;
        y = guess;
        h_prev = h_try;
        have_prev = true;
        t_cur += h_try;
        ++local.substeps;
        if (h < nominal && ++successes_since_halving >= 3) {
            h = std::min(nominal, 2.0 * h);
            successes_since_halving = 0;
        }
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return y;
}

Trajectory simulate(const OdeSystem& system, const Eigen::VectorXd& x0, double t0, const SimulationOptions& options,
                    std::mt19937_64* rng) {
    if (!(options.dt_out_s > 0.0) || !(options.horizon_s >= 0.0)) {
        throw DomainError("simulation needs dt_out > 0 and a non-negative horizon");
    }
    if (options.process_noise_std > 0.0 && rng == nullptr) {
        throw DomainError("process noise requested without a random generator");
    }
    const auto steps = static_cast<long>(std::llround(options.horizon_s / options.dt_out_s));
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.times.push_back(t0);
    traj.states.push_back(x0);
    Eigen::VectorXd x = x0;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (long k = 1; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k - 1) * options.dt_out_s;
        x = step(system, x, t, options.dt_out_s, options.step);
        if (options.process_noise_std > 0.0) {
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                x(i) += options.process_noise_std * noise(*rng);
            }
        }
        traj.times.push_back(t0 + static_cast<double>(k) * options.dt_out_s);
        traj.states.push_back(x);
    }
    return traj;
}

} // namespace soilest
