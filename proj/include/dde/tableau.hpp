#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dde {

/// Explicit Runge-Kutta coefficients with an embedded pair and an optional
/// continuous extension b_i(theta) = sum_p dense[i][p] * theta^(p+1).
struct ButcherTableau {
    std::string name;
    std::size_t stages = 0;
    std::vector<std::vector<double>> a;  // stages x stages, strictly lower triangular
    std::vector<double> b;
    std::vector<double> b_hat;
    std::vector<double> c;
    int order = 0;
    int embedded_order = 0;
    bool has_embedded = false;
    /// Last stage evaluates f(t + dt, y_new) (first same as last).
    bool fsal = false;
    std::vector<std::vector<double>> dense;

    [[nodiscard]] bool has_dense() const { return !dense.empty(); }

    /// b_i(theta) and its theta-derivative for every stage.
    void dense_weights(double theta, std::vector<double>& w) const;
    void dense_weights_derivative(double theta, std::vector<double>& w) const;
};

/// Returns an empty string when all consistency conditions hold within tol,
/// otherwise a description of the first violation.
std::string check_tableau(const ButcherTableau& tab, double tol = 1e-14);

/// Classic four-stage fourth-order method; no embedded estimate.
const ButcherTableau& rk4_tableau();

/// Tsitouras 5(4) pair with its fourth-order free interpolant.
const ButcherTableau& tsit5_tableau();

}  // namespace dde
