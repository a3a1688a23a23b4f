#pragma once

// Method-of-steps driver. The right-hand side handed to the ODE stepper reads
// delayed values through a HistoryAccessor backed by this integrator's own
// dense solution. Steps longer than the smallest delay read the not yet
// computed part of the current step; those steps are resolved by
// fixed-point iteration on the step's continuous extension.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dde/dense_solution.hpp"
#include "dde/discontinuity.hpp"
#include "dde/nonlinear.hpp"
#include "dde/stepper.hpp"
#include "dde/types.hpp"

namespace dde {

enum class ReturnCode { Success, MaxSteps, StepSizeUnderflow, FixedPointDivergence };

std::string to_string(ReturnCode rc);

struct DDESolution {
    std::shared_ptr<const DDEProblem> problem;
    Method method = Method::Tsit5;
    DenseSolution dense;
    /// t0 followed by the right endpoint of every accepted step.
    std::vector<double> t;
    /// Per accepted step: whether it read beyond its own left endpoint.
    std::vector<bool> extrapolated;
    std::vector<double> saveat_t;
    std::vector<State> saveat_x;
    SolveStats stats;
    ReturnCode retcode = ReturnCode::Success;

    [[nodiscard]] bool success() const { return retcode == ReturnCode::Success; }
    [[nodiscard]] double t0() const { return problem->t0; }
    [[nodiscard]] double tf() const { return problem->tf; }

    /// Dense readout; user history before t0. Throws DdeError(OutOfRange)
    /// past tf.
    [[nodiscard]] State eval(double t) const;
    [[nodiscard]] double eval(double t, std::size_t i) const;
};

class DDEIntegrator {
  public:
    enum class StepOutcome { Accepted, Rejected };

    DDEIntegrator(DDEProblem prob, Method method, SolverOptions opts);
    DDEIntegrator(const DDEIntegrator&) = delete;
    DDEIntegrator& operator=(const DDEIntegrator&) = delete;

    /// Attempts one step of size dt (already truncated to any stop). When
    /// target is given the right endpoint is exactly that value.
    StepOutcome perform_step(double dt, std::optional<double> target = std::nullopt);

    /// One iteration of the solve loop. Returns false when finished or failed.
    bool step();

    /// Runs to tf and hands over the solution.
    DDESolution finish();

    [[nodiscard]] double t() const { return t_; }
    [[nodiscard]] const State& y() const { return y_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] const SolveStats& stats() const { return stats_; }
    [[nodiscard]] const DenseSolution& dense() const { return dense_; }
    [[nodiscard]] const DiscontinuityAgenda& agenda() const { return agenda_; }
    [[nodiscard]] const DDEProblem& problem() const { return *prob_; }
    [[nodiscard]] const SolverOptions& options() const { return opts_; }
    [[nodiscard]] HistoryAccessor& history() { return hist_; }
    [[nodiscard]] Method method() const { return method_; }
    [[nodiscard]] std::optional<ReturnCode> retcode() const { return retcode_; }
    [[nodiscard]] bool defect_control_active() const { return defect_active_; }
    [[nodiscard]] int max_tracked_order() const { return max_order_; }
    [[nodiscard]] const std::vector<double>& accepted_times() const { return times_; }
    /// Fixed-point sweeps of the most recent perform_step call.
    [[nodiscard]] int last_fp_iterations() const { return last_fp_iters_; }
    [[nodiscard]] bool last_step_extrapolated() const { return last_extrapolated_; }

    /// Evaluates the wrapped ODE right-hand side f(t, x, history).
    void ode_rhs(std::span<double> dx, std::span<const double> x, double t);

  private:
    StepResult attempt(double dt);
    std::vector<double> pack(const StepResult& res, double dt) const;
    SolutionSegment unpack(const SolutionSegment& like, std::span<const double> z, double dt) const;
    std::vector<double> fp_weights(const StepResult& res) const;
    double initial_dt();
    std::optional<double> on_step_rejected(double t_right);
    double dt_floor() const;
    void reject(double next_dt);

    std::shared_ptr<const DDEProblem> prob_;
    Method method_;
    MethodInfo info_;
    SolverOptions opts_;
    DenseSolution dense_;
    HistoryAccessor hist_;
    DiscontinuityAgenda agenda_;
    JacobianCache jac_;
    AndersonState anderson_;
    OdeRhs f_ode_;

    double t_;
    State y_;
    State f_;  // f(t_, y_), reused as the first stage
    State dfdt_;
    double dt_ = 0.0;
    double requested_dt_ = 0.0;
    std::optional<double> min_lag_;
    int max_order_ = 0;
    bool defect_active_ = false;
    double max_delay_seen_ = 0.0;
    int consecutive_rejects_ = 0;
    int last_fp_iters_ = 0;
    bool last_extrapolated_ = false;
    SolveStats stats_;
    std::vector<double> times_;
    std::vector<bool> extrapolated_;
    std::optional<ReturnCode> retcode_;
};

DDESolution solve(DDEProblem prob, Method method, SolverOptions opts = {});

}  // namespace dde
