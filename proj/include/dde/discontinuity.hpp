#pragma once

// Discontinuity bookkeeping: a-priori propagation for constant lags and the
// sign-scan locator for state-dependent lags.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dde/dense_solution.hpp"
#include "dde/types.hpp"

namespace dde {

/// Sorts by time and merges entries closer than tol to the first entry of
/// their cluster. A merged entry keeps the time of its lowest-order member.
std::vector<Discontinuity> cluster_discontinuities(std::vector<Discontinuity> discs, double tol);

/// All t0 + sum_i k_i * lag_i in (t0, tf] with order start + sum k_i (or
/// start for neutral problems) up to max_order, clustered and sorted.
std::vector<Discontinuity> propagate_constant(double t0, std::span<const double> lags, int start_order, int max_order,
                                              bool neutral, double tf, double cluster_tol);

struct LocatedDiscontinuity {
    double t = 0.0;
    /// Index into the past list of the discontinuity that propagated here.
    std::size_t source = 0;
};

/// Scans g(xi) = xi - tau(x(xi), p, xi) - zeta on n_points equally spaced
/// points of [ta, tb] (endpoints included) for every past zeta <= ta with
/// order <= max_order, and bisects the first sign change found. A sample
/// that is exactly zero counts only when its predecessor is nonzero.
/// max_delay, when given, is raised to the largest delay value sampled.
/// Throws DdeError(NegativeDelay) if a lag evaluates below zero.
std::optional<LocatedDiscontinuity> scan_state_dependent(double ta, double tb, std::span<const Discontinuity> past,
                                                         std::span<const LagFn> lags, HistoryAccessor& approx,
                                                         int n_points, int max_order, double* max_delay = nullptr);

class DiscontinuityAgenda {
  public:
    explicit DiscontinuityAgenda(double cluster_tol = 0.0) : tol_(cluster_tol) {}

    [[nodiscard]] double cluster_tol() const { return tol_; }
    [[nodiscard]] const std::vector<Discontinuity>& pending() const { return pending_; }
    [[nodiscard]] const std::vector<Discontinuity>& past() const { return past_; }
    [[nodiscard]] const std::vector<double>& user_stops() const { return stops_; }

    /// Returns false if d merged into an existing entry (its order may drop).
    bool add_pending(Discontinuity d);
    void add_user_stop(double t);
    void add_past(Discontinuity d);

    struct Stop {
        double dt = 0.0;
        /// Exact right endpoint when the step lands on a stored time.
        std::optional<double> target;
    };
    /// Shortens dt to land on the earliest pending or user stop in
    /// (t_now, t_now + dt]; stops within cluster_tol beyond that window are
    /// still landed on to avoid leaving a sliver step.
    [[nodiscard]] Stop next_stop(double t_now, double dt) const;

    /// Earliest pending discontinuity or user stop strictly after t.
    [[nodiscard]] std::optional<double> next_time_after(double t) const;

    /// Moves pending entries at or before t_new (within tolerance) to the
    /// past list and drops consumed user stops.
    void advance(double t_new);

    /// Forgets past discontinuities older than t_now - horizon.
    void prune_past(double t_now, double horizon);

  private:
    double tol_;
    std::vector<Discontinuity> pending_;
    std::vector<Discontinuity> past_;
    std::vector<double> stops_;
};

}  // namespace dde
