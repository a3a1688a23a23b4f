#pragma once

// Dense LU with partial pivoting and Anderson-accelerated fixed-point updates.

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace dde {

/// Row-major dense square matrix.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> data;

    Matrix() = default;
    explicit Matrix(std::size_t size, double fill = 0.0) : n(size), data(size * size, fill) {}

    static Matrix identity(std::size_t size);

    double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

struct LUFactors {
    Matrix lu;
    std::vector<std::size_t> pivots;
};

/// Throws DdeError(SingularMatrix) when a pivot falls below n * eps * max|A|.
LUFactors lu_factorize(const Matrix& a);
void lu_solve(const LUFactors& fac, std::span<double> b);
std::vector<double> lu_solve(const LUFactors& fac, std::span<const double> b);

/// Windowed Anderson mixing (Walker & Ni difference form).
class AndersonState {
  public:
    explicit AndersonState(std::size_t depth = 0, double damping = 1.0) : depth_(depth), damping_(damping) {}

    [[nodiscard]] std::size_t depth() const { return depth_; }
    [[nodiscard]] double damping() const { return damping_; }
    /// Number of difference columns used by the last update.
    [[nodiscard]] std::size_t last_active() const { return last_active_; }
    /// True if the last update fell back to a plain Picard step after the
    /// least-squares system lost all columns.
    [[nodiscard]] bool last_degenerate() const { return last_degenerate_; }
    [[nodiscard]] std::size_t stored() const { return xs_.size(); }

    void clear();

    /// Returns the next iterate given x_k and g(x_k).
    std::vector<double> update(std::span<const double> x, std::span<const double> gx);

  private:
    std::size_t depth_;
    double damping_;
    std::deque<std::vector<double>> xs_;
    std::deque<std::vector<double>> gs_;
    std::size_t last_active_ = 0;
    bool last_degenerate_ = false;
};

}  // namespace dde
