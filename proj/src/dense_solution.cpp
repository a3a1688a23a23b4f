#include "dde/dense_solution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dde/tableau.hpp"

namespace dde {

namespace {

struct HermiteBasis {
    double h00, h10, h01, h11;
};

HermiteBasis hermite_basis(double th) {
    const double th2 = th * th;
    const double th3 = th2 * th;
    return {2 * th3 - 3 * th2 + 1, th3 - 2 * th2 + th, -2 * th3 + 3 * th2, th3 - th2};
}

HermiteBasis hermite_basis_derivative(double th) {
    const double th2 = th * th;
    return {6 * th2 - 6 * th, 3 * th2 - 4 * th + 1, -6 * th2 + 6 * th, 3 * th2 - 2 * th};
}

}  // namespace

void SolutionSegment::eval(double t, std::span<double> out) const {
    const std::size_t n = dim();
    if (t == t_left) {
        std::copy(y_left.begin(), y_left.end(), out.begin());
        return;
    }
    if (t == t_right) {
        std::copy(y_right.begin(), y_right.end(), out.begin());
        return;
    }
    const double h = length();
    const double th = (t - t_left) / h;
    if (th > max_poly_theta || kind != InterpKind::Tsit5) {
        for (std::size_t i = 0; i < n; ++i) out[i] = eval(t, i);
        return;
    }
    thread_local std::vector<double> w;
    tsit5_tableau().dense_weights(th, w);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t s = 0; s < w.size(); ++s) acc += w[s] * stages[s][i];
        out[i] = y_left[i] + h * acc;
    }
}

State SolutionSegment::eval(double t) const {
    State out(dim());
    eval(t, out);
    return out;
}

double SolutionSegment::eval(double t, std::size_t i) const {
    if (t == t_left) return y_left[i];
    if (t == t_right) return y_right[i];
    const double th = (t - t_left) / length();
    if (th > max_poly_theta) {
        const double te = t_left + max_poly_theta * length();
        return poly(max_poly_theta, i) + (t - te) * poly_derivative(max_poly_theta, i);
    }
    return poly(th, i);
}

double SolutionSegment::poly(double th, std::size_t i) const {
    const double h = length();
    switch (kind) {
        case InterpKind::Hermite: {
            const auto [h00, h10, h01, h11] = hermite_basis(th);
            return h00 * y_left[i] + h01 * y_right[i] + h * (h10 * stages[0][i] + h11 * stages[1][i]);
        }
        case InterpKind::Tsit5: {
            thread_local std::vector<double> w;
            tsit5_tableau().dense_weights(th, w);
            double acc = 0.0;
            for (std::size_t s = 0; s < w.size(); ++s) acc += w[s] * stages[s][i];
            return y_left[i] + h * acc;
        }
    }
    return 0.0;
}

double SolutionSegment::poly_derivative(double th, std::size_t i) const {
    const double h = length();
    switch (kind) {
        case InterpKind::Hermite: {
            const auto [d00, d10, d01, d11] = hermite_basis_derivative(th);
            return (d00 * y_left[i] + d01 * y_right[i]) / h + d10 * stages[0][i] + d11 * stages[1][i];
        }
        case InterpKind::Tsit5: {
            thread_local std::vector<double> w;
            tsit5_tableau().dense_weights_derivative(th, w);
            double acc = 0.0;
            for (std::size_t s = 0; s < w.size(); ++s) acc += w[s] * stages[s][i];
            return acc;
        }
    }
    return 0.0;
}

void SolutionSegment::eval_derivative(double t, std::span<double> out) const {
    for (std::size_t i = 0; i < dim(); ++i) out[i] = eval_derivative(t, i);
}

State SolutionSegment::eval_derivative(double t) const {
    State out(dim());
    eval_derivative(t, out);
    return out;
}

double SolutionSegment::eval_derivative(double t, std::size_t i) const {
    const double th = (t - t_left) / length();
    return poly_derivative(std::min(th, max_poly_theta), i);
}

SolutionSegment make_hermite_segment(double t_l, double t_r, State y_l, State y_r, State f_l, State f_r) {
    SolutionSegment seg;
    seg.t_left = t_l;
    seg.t_right = t_r;
    seg.y_left = std::move(y_l);
    seg.y_right = std::move(y_r);
    seg.stages = {std::move(f_l), std::move(f_r)};
    seg.kind = InterpKind::Hermite;
    return seg;
}

void DenseSolution::append(SolutionSegment seg) {
    const double expected = t_head();
    if (seg.t_left != expected || !(seg.t_right > seg.t_left)) {
        throw DdeError(ErrorCode::NonContiguous, "segment [" + std::to_string(seg.t_left) + ", " +
                                                     std::to_string(seg.t_right) + "] does not start at " +
                                                     std::to_string(expected));
    }
    segments_.push_back(std::move(seg));
}

void DenseSolution::replace_last(SolutionSegment seg) {
    if (segments_.empty()) throw DdeError(ErrorCode::EmptySolution, "replace_last on empty solution");
    if (seg.t_left != segments_.back().t_left || !(seg.t_right > seg.t_left)) {
        throw DdeError(ErrorCode::NonContiguous, "replacement does not share the left endpoint");
    }
    segments_.back() = std::move(seg);
}

void DenseSolution::pop_last() {
    if (segments_.empty()) throw DdeError(ErrorCode::EmptySolution, "pop_last on empty solution");
    segments_.pop_back();
}

void DenseSolution::require_nonempty(double t) const {
    if (segments_.empty()) {
        throw DdeError(ErrorCode::EmptySolution, "no segments to evaluate at t = " + std::to_string(t));
    }
}

const SolutionSegment& DenseSolution::locate(double t) const {
    require_nonempty(t);
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const SolutionSegment& s, double v) { return s.t_right < v; });
    if (it == segments_.end()) return segments_.back();
    return *it;
}

void DenseSolution::eval(double t, std::span<double> out) const { locate(t).eval(t, out); }

State DenseSolution::eval(double t) const { return locate(t).eval(t); }

double DenseSolution::eval(double t, std::size_t i) const { return locate(t).eval(t, i); }

State DenseSolution::eval_derivative(double t) const { return locate(t).eval_derivative(t); }

double DenseSolution::eval_derivative(double t, std::size_t i) const { return locate(t).eval_derivative(t, i); }

HistoryAccessor::HistoryAccessor(const DenseSolution& sol, const DDEProblem& prob, State x0)
    : sol_(&sol),
      prob_(&prob),
      x0_(std::move(x0)),
      watermark_(-std::numeric_limits<double>::infinity()),
      base_(-std::numeric_limits<double>::infinity()) {}

void HistoryAccessor::reset_watermark(double t_base) {
    base_ = t_base;
    watermark_ = t_base;
}

void HistoryAccessor::eval(double t, std::span<double> out) {
    touch(t);
    const double t0 = sol_->t0();
    if (t < t0) {
        const State h = prob_->history(prob_->params, t);
        std::copy(h.begin(), h.end(), out.begin());
    } else if (t == t0 && sol_->empty()) {
        std::copy(x0_.begin(), x0_.end(), out.begin());
    } else {
        sol_->eval(t, out);
    }
}

State HistoryAccessor::operator()(double t) {
    State out(x0_.size());
    eval(t, out);
    return out;
}

double HistoryAccessor::operator()(double t, std::size_t i) {
    touch(t);
    const double t0 = sol_->t0();
    if (t < t0) return prob_->history(prob_->params, t)[i];
    if (t == t0 && sol_->empty()) return x0_[i];
    return sol_->eval(t, i);
}

State HistoryAccessor::history_derivative(double t) const {
    if (prob_->history_derivative) return prob_->history_derivative(prob_->params, t);
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(t));
    // One-sided towards the past so the stencil stays inside the history domain.
    const State a = prob_->history(prob_->params, t - 2 * h);
    const State b = prob_->history(prob_->params, t - h);
    const State c = prob_->history(prob_->params, t);
    State d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (a[i] - 4 * b[i] + 3 * c[i]) / (2 * h);
    return d;
}

State HistoryAccessor::derivative(double t) {
    touch(t);
    const double t0 = sol_->t0();
    if (t < t0 || sol_->empty()) return history_derivative(t);
    return sol_->eval_derivative(t);
}

double HistoryAccessor::derivative(double t, std::size_t i) {
    touch(t);
    const double t0 = sol_->t0();
    if (t < t0 || sol_->empty()) return history_derivative(t)[i];
    return sol_->eval_derivative(t, i);
}

}  // namespace dde
