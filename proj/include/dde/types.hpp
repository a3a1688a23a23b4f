#pragma once

// Problem definitions, solver options and shared value types.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dde {

using State = std::vector<double>;
using Params = std::vector<double>;

class HistoryAccessor;

enum class ErrorCode {
    NonPositiveLag,
    EmptyTimeSpan,
    DimensionMismatch,
    InvalidOptions,
    EmptySolution,
    NonContiguous,
    SingularMatrix,
    NegativeDelay,
    OutOfRange,
    UnknownProblem,
    UnknownMethod,
};

std::string to_string(ErrorCode code);

class DdeError : public std::runtime_error {
  public:
    DdeError(ErrorCode code, const std::string& what)
        : std::runtime_error(to_string(code) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Right-hand side f(t, x, h, p) written into dx. Delayed values are read
/// through the history accessor.
using RhsFn = std::function<void(std::span<double> dx, std::span<const double> x,
                                 HistoryAccessor& h, const Params& p, double t)>;

/// History x(t) for t < t0.
using HistoryFn = std::function<State(const Params& p, double t)>;

/// State/time-dependent delay tau(x, p, t) >= 0.
using LagFn = std::function<double(std::span<const double> x, const Params& p, double t)>;

/// Optional analytic Jacobian of f with respect to x (row-major n*n), history frozen.
using JacobianFn = std::function<void(std::span<double> jac, std::span<const double> x,
                                      HistoryAccessor& h, const Params& p, double t)>;

struct DDEProblem {
    RhsFn rhs;
    HistoryFn history;
    HistoryFn history_derivative;  // neutral problems only
    double t0 = 0.0;
    double tf = 1.0;
    std::optional<State> x0;
    Params params;
    std::vector<double> constant_lags;
    std::vector<LagFn> dependent_lags;
    bool neutral = false;
    int order_of_discontinuity = 0;
    JacobianFn jacobian;

    // Inferred by validate_problem.
    std::size_t dim = 0;

    /// Initial state: x0 when given, history(t0) otherwise.
    [[nodiscard]] State initial_state() const;
};

/// Checks invariants, infers the dimension and returns the validated copy.
DDEProblem validate_problem(DDEProblem prob);

struct SolverOptions {
    double rtol = 1e-3;
    std::vector<double> atol = {1e-6};  // scalar (size 1) or per component
    std::optional<double> dt_init;
    double dt_min = 0.0;
    double dt_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1'000'000;
    bool adaptive = true;

    int fp_max_iters = 10;
    double fp_tol_factor = 0.01;
    std::size_t anderson_depth = 0;
    double anderson_damping = 1.0;

    std::optional<int> disc_max_order;
    std::optional<double> disc_cluster_tol;
    int disc_scan_points = 10;

    /// Adds the defect estimate to the error control. Always on for RK4 and
    /// whenever the problem declares no lags.
    bool defect_control = false;
    std::vector<double> defect_thetas = {0.3, 0.7};

    /// Caps every step at the smallest constant lag (classic method of steps).
    bool constrained = false;

    std::vector<double> saveat;
    std::vector<double> tstops;

    [[nodiscard]] double atol_at(std::size_t i) const { return atol.size() == 1 ? atol[0] : atol[i]; }
};

void validate_options(const SolverOptions& opts, std::size_t dim);

struct Discontinuity {
    double t = 0.0;
    int order = 0;

    friend bool operator==(const Discontinuity&, const Discontinuity&) = default;
    friend auto operator<=>(const Discontinuity&, const Discontinuity&) = default;
};

struct SolveStats {
    std::uint64_t n_rhs_evals = 0;
    std::uint64_t n_accepted = 0;
    std::uint64_t n_rejected = 0;
    std::uint64_t n_fp_iters = 0;
    std::uint64_t n_fp_failures = 0;
    std::uint64_t n_jacobians = 0;
    std::uint64_t n_factorizations = 0;

    friend bool operator==(const SolveStats&, const SolveStats&) = default;
};

}  // namespace dde
