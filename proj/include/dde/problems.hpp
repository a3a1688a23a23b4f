#pragma once

// Canonical test problems with their published parameterizations.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dde/stepper.hpp"
#include "dde/types.hpp"

namespace dde::problems {

enum class ReferenceKind { Analytic, SelfReference };

struct NamedProblem {
    std::string id;
    std::string description;
    DDEProblem problem;
    Method method = Method::Tsit5;
    double rtol = 1e-6;
    std::vector<double> atol = {1e-9};
    /// Suggested mandatory stops, passed through SolverOptions::tstops.
    std::vector<double> tstops;
    ReferenceKind reference = ReferenceKind::SelfReference;
    /// Exact solution when reference == Analytic.
    std::function<State(double)> analytic;
};

/// x'(t) = -x(t - 1), x = 1 for t <= 0, on [0, 10].
NamedProblem hutchinson();

struct MackeyGlassParams {
    double lambda = 2.0;
    double theta = 1.0;
    double n = 9.65;
    double tau = 2.0;
    double gamma = 1.0;
    double x0 = 0.5;
};

/// x' = lambda theta^n x(t-tau) / (theta^n + x(t-tau)^n) - gamma x on [0, 600].
NamedProblem mackey_glass(const MackeyGlassParams& p = {});

/// x'(t) = -x(t - 1/3) - x(t - 1/5) on [0, 100] with a unit jump at t = 0:
/// history 0 for t < 0 and x(0) = 1.
NamedProblem two_delay_linear();

/// Six-component antibody production model with vanishing state-dependent
/// delays x5(t), x6(t) and Heaviside switches at t1 = 35, t2 = 197. The
/// switch times are only declared as stops when add_tstops is set.
NamedProblem waltman(bool add_tstops = false);

/// Piecewise-polynomial solution of Hutchinson's equation on [0, tf],
/// built by integrating the method-of-steps recursion exactly.
class HutchinsonExact {
  public:
    explicit HutchinsonExact(int intervals = 10);
    [[nodiscard]] double operator()(double t) const;

  private:
    // coeffs_[k][j]: coefficient of (t - k)^j on [k, k + 1].
    std::vector<std::vector<double>> coeffs_;
};

std::vector<std::string> problem_ids();

/// Throws DdeError(UnknownProblem) for ids outside problem_ids().
NamedProblem make_problem(std::string_view id);

}  // namespace dde::problems
