#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <random>
#include <vector>

namespace soilest {

/// Autonomous-or-not ODE dx/dt = f(t, x) with an analytic sparse Jacobian.
class OdeSystem {
public:
    virtual ~OdeSystem() = default;
    [[nodiscard]] virtual Eigen::Index dimension() const = 0;
    [[nodiscard]] virtual Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x) const = 0;
    [[nodiscard]] virtual Eigen::SparseMatrix<double> jacobian(double t, const Eigen::VectorXd& x) const = 0;

    /// Systems that can be written as d m(x)/dt = g(t, x), with m acting
    /// node by node, return true here and implement storage() and flux().
    /// The implicit stages are then solved in that form: they conserve m
    /// exactly and stay well conditioned where dm/dx vanishes.
    [[nodiscard]] virtual bool has_storage_form() const { return false; }
    /// m(x) and its node-wise derivative (which must stay positive).
    virtual void storage(const Eigen::VectorXd& x, Eigen::VectorXd& m, Eigen::VectorXd& dm) const;
    /// Earliest time in (t_from, t_to) at which f jumps in t (e.g. forcing
    /// switching on or off), or t_to. Sub-steps are cut there so that no
    /// step straddles a jump.
    [[nodiscard]] virtual double next_discontinuity(double /*t_from*/, double t_to) const { return t_to; }
    /// g(t, x) and, when requested, dg/dx.
    virtual void flux(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                      Eigen::SparseMatrix<double>* dg) const;
};

struct StepOptions {
    /// 1: backward Euler throughout. 2: backward Euler on the first
    /// sub-step, variable-coefficient BDF2 afterwards.
    int order = 2;
    double max_substep_s = 180.0;
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_newton_iterations = 15;
    /// Step halvings tried in the Newton line search.
    int max_backtracks = 8;
    int max_halvings = 14;
};

struct StepStats {
    int substeps = 0;
    int newton_iterations = 0;
    int halvings = 0;
    double smallest_substep_s = 0.0;
};

/// Advances x from t to t + dt with implicit BDF sub-steps solved by Newton
/// iterations on the analytic Jacobian. A sub-step whose Newton iteration
/// fails is retried at half the size; once max_halvings is exhausted a
/// StepFailure carrying t, the sub-step size and the last update norm is
/// thrown.
///
/// The step is self-contained (no history carried between calls), so it
/// defines a deterministic state-in/state-out map.
[[nodiscard]] Eigen::VectorXd step(const OdeSystem& system, const Eigen::VectorXd& x, double t, double dt,
                                   const StepOptions& options = {}, StepStats* stats = nullptr);

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
};

struct SimulationOptions {
    double horizon_s = 6.0 * 86400.0;
    double dt_out_s = 720.0;
    /// Standard deviation of zero-mean Gaussian noise added to every state
    /// after each output interval. Requires an rng when non-zero.
    double process_noise_std = 0.0;
    StepOptions step;
};

/// States at t0, t0 + dt_out, ... up to the horizon (inclusive).
[[nodiscard]] Trajectory simulate(const OdeSystem& system, const Eigen::VectorXd& x0, double t0,
                                  const SimulationOptions& options, std::mt19937_64* rng = nullptr);

} // namespace soilest
