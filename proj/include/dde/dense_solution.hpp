#pragma once

// Piecewise continuous solution storage and the history accessor that closes
// the right-hand side over it.

#include <cstddef>
#include <span>
#include <vector>

#include "dde/types.hpp"

namespace dde {

enum class InterpKind {
    /// Cubic Hermite; stages = {f(t_left), f(t_right)}.
    Hermite,
    /// Free interpolant of the Tsitouras 5(4) pair; stages = k1..k7.
    Tsit5,
};

struct SolutionSegment {
    double t_left = 0.0;
    double t_right = 0.0;
    State y_left;
    State y_right;
    std::vector<State> stages;
    InterpKind kind = InterpKind::Hermite;

    [[nodiscard]] std::size_t dim() const { return y_left.size(); }
    [[nodiscard]] double length() const { return t_right - t_left; }

    /// Polynomial value at t; t outside [t_left, t_right] extrapolates.
    /// More than one step length past t_right the polynomial is continued
    /// by its tangent there, so far reads stay bounded.
    static constexpr double max_poly_theta = 2.0;

    void eval(double t, std::span<double> out) const;
    [[nodiscard]] State eval(double t) const;
    [[nodiscard]] double eval(double t, std::size_t i) const;

    void eval_derivative(double t, std::span<double> out) const;
    [[nodiscard]] State eval_derivative(double t) const;
    [[nodiscard]] double eval_derivative(double t, std::size_t i) const;

  private:
    [[nodiscard]] double poly(double th, std::size_t i) const;
    [[nodiscard]] double poly_derivative(double th, std::size_t i) const;
};

/// Cubic Hermite segment through (t_l, y_l, f_l) and (t_r, y_r, f_r).
SolutionSegment make_hermite_segment(double t_l, double t_r, State y_l, State y_r, State f_l, State f_r);

class DenseSolution {
  public:
    explicit DenseSolution(double t0 = 0.0) : t0_(t0) {}

    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] bool empty() const { return segments_.empty(); }
    [[nodiscard]] std::size_t size() const { return segments_.size(); }
    [[nodiscard]] double t_head() const { return segments_.empty() ? t0_ : segments_.back().t_right; }
    [[nodiscard]] const std::vector<SolutionSegment>& segments() const { return segments_; }
    [[nodiscard]] const SolutionSegment& back() const { return segments_.back(); }

    /// Requires seg.t_left == t_head() (bit-exact).
    void append(SolutionSegment seg);
    /// Swaps the last segment for a recomputed one over the same left endpoint.
    void replace_last(SolutionSegment seg);
    void pop_last();

    /// Segment whose closed interval holds t; interior boundaries resolve to the
    /// left segment; t beyond t_head resolves to the last segment.
    [[nodiscard]] const SolutionSegment& locate(double t) const;

    void eval(double t, std::span<double> out) const;
    [[nodiscard]] State eval(double t) const;
    [[nodiscard]] double eval(double t, std::size_t i) const;
    [[nodiscard]] State eval_derivative(double t) const;
    [[nodiscard]] double eval_derivative(double t, std::size_t i) const;

  private:
    void require_nonempty(double t) const;

    double t0_;
    std::vector<SolutionSegment> segments_;
};

/// History view used inside the right-hand side: the user history before t0,
/// the dense solution after it, and extrapolation of the last segment beyond
/// t_head. Records the largest time queried since the last watermark reset.
class HistoryAccessor {
  public:
    HistoryAccessor(const DenseSolution& sol, const DDEProblem& prob, State x0);

    [[nodiscard]] State operator()(double t);
    [[nodiscard]] double operator()(double t, std::size_t i);
    void eval(double t, std::span<double> out);

    /// x'(t); the user history derivative (or a central difference of the
    /// history) before t0.
    [[nodiscard]] State derivative(double t);
    [[nodiscard]] double derivative(double t, std::size_t i);

    void reset_watermark(double t_base);
    [[nodiscard]] double watermark() const { return watermark_; }
    [[nodiscard]] double watermark_base() const { return base_; }
    [[nodiscard]] bool extrapolation_used() const { return watermark_ > base_; }

    [[nodiscard]] const DenseSolution& solution() const { return *sol_; }
    [[nodiscard]] const Params& params() const { return prob_->params; }
    [[nodiscard]] double t0() const { return sol_->t0(); }

  private:
    void touch(double t) {
        if (t > watermark_) watermark_ = t;
    }
    [[nodiscard]] State history_derivative(double t) const;

    const DenseSolution* sol_;
    const DDEProblem* prob_;
    State x0_;
    double watermark_;
    double base_;
};

}  // namespace dde
