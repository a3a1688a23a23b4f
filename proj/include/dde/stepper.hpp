#pragma once

// Single-step ODE methods with embedded error estimates and continuous
// extensions, plus step-size control. The steppers see an ordinary ODE
// right-hand side; delayed reads are hidden inside the closure.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dde/dense_solution.hpp"
#include "dde/nonlinear.hpp"
#include "dde/tableau.hpp"
#include "dde/types.hpp"

namespace dde {

using OdeRhs = std::function<void(std::span<double> dx, std::span<const double> x, double t)>;
using OdeJacobian = std::function<void(std::span<double> jac, std::span<const double> x, double t)>;

enum class Method { RK4, Tsit5, Rosenbrock23 };

struct MethodInfo {
    std::string_view name;
    int order;
    /// Order q of the error estimate; the controller uses err^(-1/(q+1)).
    int controller_order;
    bool implicit;
    InterpKind interp;
};

MethodInfo method_info(Method m);
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();

enum class StepStatus { Ok, NonFiniteState, SingularMatrix };

struct StepResult {
    StepStatus status = StepStatus::Ok;
    State y_new;
    State err;
    SolutionSegment segment;
    std::size_t n_rhs = 0;
};

/// One explicit RK step. f0, when given, is f(t, y) and saves the first
/// evaluation. Tableaus without a free interpolant get a Hermite segment
/// (one extra evaluation at t + dt).
StepResult step_explicit(const ButcherTableau& tab, const OdeRhs& f, double t, std::span<const double> y, double dt,
                         const State* f0 = nullptr);

/// Jacobian, time derivative and factorization of W = I - d*dt*J shared
/// across the stages, fixed-point sweeps and consecutive steps.
class JacobianCache {
  public:
    static constexpr double refresh_ratio = 1.5;

    [[nodiscard]] bool needs_refresh(double dt) const;
    void mark_stale() { stale_ = true; }
    [[nodiscard]] bool stale() const { return stale_; }

    /// Stores J and factors W for dt. Throws DdeError(SingularMatrix).
    void refresh(Matrix jac, double dt, double gamma);
    /// Refactors W with the stored Jacobian for a new dt.
    void refactor(double dt, double gamma);

    [[nodiscard]] const Matrix& jacobian() const { return jac_; }
    [[nodiscard]] const LUFactors& factors() const { return lu_; }
    /// Solves W x = b in place.
    void solve(std::span<double> b) const;
    [[nodiscard]] double factored_dt() const { return dt_; }
    [[nodiscard]] bool has_factorization() const { return has_fac_; }
    [[nodiscard]] std::size_t n_factorizations() const { return n_fact_; }

  private:
    Matrix jac_;
    LUFactors lu_;
    std::vector<double> row_scale_;
    double dt_ = 0.0;
    bool has_fac_ = false;
    bool stale_ = true;
    std::size_t n_fact_ = 0;
};

/// Forward-difference Jacobian with h_i = sqrt(eps) * max(|y_i|, 1).
/// f0 = f(t, y). Adds the evaluations used to *n_rhs when given.
Matrix compute_jacobian(const OdeRhs& f, double t, std::span<const double> y, std::span<const double> f0,
                        std::size_t* n_rhs = nullptr);

/// Backward difference df/dt at fixed x, so no evaluation reaches past t.
State time_derivative(const OdeRhs& f, double t, std::span<const double> y, std::span<const double> f0,
                      std::size_t* n_rhs = nullptr);

/// Shampine's two-stage order-2 Rosenbrock method with its order-3 error
/// companion. The cache must hold a factorization; dfdt may be empty.
StepResult step_rosenbrock(const OdeRhs& f, double t, std::span<const double> y, double dt, const JacobianCache& cache,
                           std::span<const double> f0, std::span<const double> dfdt);

/// Shift parameter d = 1 / (2 + sqrt(2)).
double rosenbrock_gamma();

/// Weighted RMS norm; atol is scalar (size 1) or per component.
double error_norm(std::span<const double> err, std::span<const double> y_old, std::span<const double> y_new,
                  double rtol, std::span<const double> atol);

struct ControllerParams {
    double safety = 0.9;
    double qmin = 0.2;
    double qmax = 5.0;
};

/// dt * min(qmax, max(qmin, safety * err^(-1/(q+1)))); growth is capped at 1
/// after a rejection. The caller checks the result against dt_min.
double propose_dt(double dt, double err, int controller_order, bool accepted, const ControllerParams& p = {});

/// dt * max over thetas of |seg'(t) - f(t, seg(t))| per component.
State residual_estimate(const SolutionSegment& seg, const OdeRhs& f, std::span<const double> thetas,
                        std::size_t* n_rhs = nullptr);

bool all_finite(std::span<const double> v);

}  // namespace dde
