#include "dde/discontinuity.hpp"

#include <algorithm>
#include <cmath>

namespace dde {

std::vector<Discontinuity> cluster_discontinuities(std::vector<Discontinuity> discs, double tol) {
    std::sort(discs.begin(), discs.end());
    std::vector<Discontinuity> out;
    double anchor = 0.0;
    for (const Discontinuity& d : discs) {
        if (!out.empty() && d.t - anchor <= tol) {
            Discontinuity& rep = out.back();
            if (d.order < rep.order) rep = d;
            continue;
        }
        out.push_back(d);
        anchor = d.t;
    }
    return out;
}

namespace {

void enumerate_lag_sums(std::span<const double> lags, std::size_t idx, std::vector<int>& counts, int total, int budget,
                        double t0, double tf, int start_order, bool neutral, std::vector<Discontinuity>& out) {
    if (idx == lags.size()) {
        if (total == 0) return;
        double offset = 0.0;
        for (std::size_t i = 0; i < lags.size(); ++i) offset += static_cast<double>(counts[i]) * lags[i];
        const double t = t0 + offset;
        if (t > t0 && t <= tf) out.push_back({t, neutral ? start_order : start_order + total});
        return;
    }
    for (int k = 0;; ++k) {
        if (budget >= 0 && total + k > budget) break;
        double partial = 0.0;
        for (std::size_t i = 0; i < idx; ++i) partial += static_cast<double>(counts[i]) * lags[i];
        partial += static_cast<double>(k) * lags[idx];
        if (t0 + partial > tf) break;
        counts[idx] = k;
        enumerate_lag_sums(lags, idx + 1, counts, total + k, budget, t0, tf, start_order, neutral, out);
    }
    counts[idx] = 0;
}

}  // namespace

std::vector<Discontinuity> propagate_constant(double t0, std::span<const double> lags, int start_order, int max_order,
                                              bool neutral, double tf, double cluster_tol) {
    if (lags.empty() || max_order < start_order) return {};
    // Neutral problems do not smooth, so only the time horizon bounds the chains.
    const int budget = neutral ? -1 : max_order - start_order;
    if (budget == 0) return {};
    std::vector<int> counts(lags.size(), 0);
    std::vector<Discontinuity> out;
    enumerate_lag_sums(lags, 0, counts, 0, budget, t0, tf, start_order, neutral, out);
    return cluster_discontinuities(std::move(out), cluster_tol);
}

std::optional<LocatedDiscontinuity> scan_state_dependent(double ta, double tb, std::span<const Discontinuity> past,
                                                         std::span<const LagFn> lags, HistoryAccessor& approx,
                                                         int n_points, int max_order, double* max_delay) {
    if (lags.empty() || past.empty() || !(tb > ta) || n_points < 2) return std::nullopt;
    const Params& p = approx.params();

    std::vector<double> xi(static_cast<std::size_t>(n_points));
    const double step = (tb - ta) / static_cast<double>(n_points - 1);
    for (int i = 0; i < n_points; ++i) xi[i] = ta + step * i;
    xi.back() = tb;

    auto lag_at = [&](const LagFn& lag, double t) {
        const State x = approx(t);
        const double tau = lag(x, p, t);
        if (tau < 0.0) throw DdeError(ErrorCode::NegativeDelay, "dependent lag is negative at t = " + std::to_string(t));
        if (max_delay && tau > *max_delay) *max_delay = tau;
        return tau;
    };

    // Delay samples do not depend on zeta, so evaluate them once per lag.
    std::vector<std::vector<double>> taus(lags.size(), std::vector<double>(xi.size()));
    for (std::size_t l = 0; l < lags.size(); ++l) {
        for (std::size_t i = 0; i < xi.size(); ++i) taus[l][i] = lag_at(lags[l], xi[i]);
    }

    std::vector<std::size_t> order(past.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return past[a].t < past[b].t; });

    const double tol = 1e-12 * std::max(1.0, std::abs(tb));
    for (std::size_t j : order) {
        const Discontinuity& zeta = past[j];
        if (zeta.t > ta || zeta.order > max_order) continue;
        for (std::size_t l = 0; l < lags.size(); ++l) {
            auto g_sample = [&](std::size_t i) { return xi[i] - taus[l][i] - zeta.t; };
            for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
                const double ga = g_sample(i);
                const double gb = g_sample(i + 1);
                if (ga == 0.0) continue;
                if (gb == 0.0) return LocatedDiscontinuity{xi[i + 1], j};
                if ((ga < 0.0) == (gb < 0.0)) continue;

                auto g = [&](double t) { return t - lag_at(lags[l], t) - zeta.t; };
                double a = xi[i];
                double b = xi[i + 1];
                double fa = ga;
                for (int it = 0; it < 200 && b - a > tol; ++it) {
                    const double m = 0.5 * (a + b);
                    const double fm = g(m);
                    if (fm == 0.0) return LocatedDiscontinuity{m, j};
                    if ((fm < 0.0) == (fa < 0.0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                return LocatedDiscontinuity{0.5 * (a + b), j};
            }
        }
    }
    return std::nullopt;
}

bool DiscontinuityAgenda::add_pending(Discontinuity d) {
    for (Discontinuity& e : pending_) {
        if (std::abs(e.t - d.t) <= tol_) {
            e.order = std::min(e.order, d.order);
            return false;
        }
    }
    pending_.insert(std::upper_bound(pending_.begin(), pending_.end(), d), d);
    return true;
}

void DiscontinuityAgenda::add_user_stop(double t) {
    stops_.insert(std::upper_bound(stops_.begin(), stops_.end(), t), t);
}

void DiscontinuityAgenda::add_past(Discontinuity d) {
    for (const Discontinuity& e : past_) {
        if (std::abs(e.t - d.t) <= tol_ && e.order <= d.order) return;
    }
    past_.push_back(d);
}

std::optional<double> DiscontinuityAgenda::next_time_after(double t) const {
    std::optional<double> best;
    auto consider = [&](double s) {
        if (s > t && (!best || s < *best)) best = s;
    };
    for (const Discontinuity& d : pending_) consider(d.t);
    for (double s : stops_) consider(s);
    return best;
}

DiscontinuityAgenda::Stop DiscontinuityAgenda::next_stop(double t_now, double dt) const {
    const auto next = next_time_after(t_now);
    if (next && *next - t_now <= dt + tol_) return {*next - t_now, *next};
    return {dt, std::nullopt};
}

void DiscontinuityAgenda::advance(double t_new) {
    auto landed = [&](double s) { return s <= t_new + tol_; };
    std::vector<Discontinuity> keep;
    for (const Discontinuity& d : pending_) {
        if (landed(d.t)) {
            add_past(d);
        } else {
            keep.push_back(d);
        }
    }
    pending_ = std::move(keep);
    std::erase_if(stops_, landed);
}

void DiscontinuityAgenda::prune_past(double t_now, double horizon) {
    std::erase_if(past_, [&](const Discontinuity& d) { return d.t < t_now - horizon; });
}

}  // namespace dde
