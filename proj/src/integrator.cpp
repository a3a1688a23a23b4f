#include "dde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace dde {

std::string to_string(ReturnCode rc) {
    switch (rc) {
        case ReturnCode::Success: return "Success";
        case ReturnCode::MaxSteps: return "MaxSteps";
        case ReturnCode::StepSizeUnderflow: return "StepSizeUnderflow";
        case ReturnCode::FixedPointDivergence: return "FixedPointDivergence";
    }
    return "Unknown";
}

State DDESolution::eval(double t) const {
    if (t > tf()) throw DdeError(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " is past tf");
    if (t < t0()) return problem->history(problem->params, t);
    return dense.eval(t);
}

double DDESolution::eval(double t, std::size_t i) const {
    if (t > tf()) throw DdeError(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " is past tf");
    if (t < t0()) return problem->history(problem->params, t)[i];
    return dense.eval(t, i);
}

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

}  // namespace

DDEIntegrator::DDEIntegrator(DDEProblem prob, Method method, SolverOptions opts)
    : prob_(std::make_shared<const DDEProblem>(validate_problem(std::move(prob)))),
      method_(method),
      info_(method_info(method)),
      opts_(std::move(opts)),
      dense_(prob_->t0),
      hist_(dense_, *prob_, prob_->initial_state()),
      anderson_(opts_.anderson_depth, opts_.anderson_damping),
      t_(prob_->t0),
      y_(prob_->initial_state()) {
    const DDEProblem& p = *prob_;
    validate_options(opts_, p.dim);
    if (!opts_.adaptive && !opts_.dt_init) {
        throw DdeError(ErrorCode::InvalidOptions, "fixed-step mode needs dt_init");
    }

    f_ode_ = [this](std::span<double> dx, std::span<const double> x, double t) { ode_rhs(dx, x, t); };

    if (!p.constant_lags.empty()) {
        min_lag_ = *std::min_element(p.constant_lags.begin(), p.constant_lags.end());
    }
    max_order_ = std::min(opts_.disc_max_order.value_or(info_.order), info_.order);
    const double tol =
        opts_.disc_cluster_tol.value_or(10.0 * eps * std::max({std::abs(p.t0), std::abs(p.tf), 1.0}));
    agenda_ = DiscontinuityAgenda(tol);
    for (const Discontinuity& d :
         propagate_constant(p.t0, p.constant_lags, p.order_of_discontinuity, max_order_, p.neutral, p.tf, tol)) {
        agenda_.add_pending(d);
    }
    agenda_.add_past({p.t0, p.order_of_discontinuity});
    for (double s : opts_.tstops) {
        if (s > p.t0 && s <= p.tf) agenda_.add_user_stop(s);
    }
    agenda_.add_user_stop(p.tf);

    defect_active_ = method_ == Method::RK4 || opts_.defect_control ||
                     (p.constant_lags.empty() && p.dependent_lags.empty());

    f_.resize(p.dim);
    ode_rhs(f_, y_, t_);
    dt_ = opts_.dt_init ? *opts_.dt_init : initial_dt();
    times_.push_back(t_);
}

void DDEIntegrator::ode_rhs(std::span<double> dx, std::span<const double> x, double t) {
    ++stats_.n_rhs_evals;
    prob_->rhs(dx, x, hist_, prob_->params, t);
}

double DDEIntegrator::dt_floor() const {
    // Below a couple of ulps t + dt no longer moves.
    const double ulp = std::nextafter(std::abs(t_), std::numeric_limits<double>::infinity()) - std::abs(t_);
    return std::max(opts_.dt_min, 2.0 * ulp);
}

double DDEIntegrator::initial_dt() {
    const DDEProblem& p = *prob_;
    const std::size_t n = p.dim;
    const double span = p.tf - p.t0;
    auto wnorm = [&](std::span<const double> v) { return error_norm(v, y_, y_, opts_.rtol, opts_.atol); };

    const double d0 = wnorm(y_);
    const double d1 = wnorm(f_);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    if (min_lag_) h0 = std::min(h0, *min_lag_);

    State y1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y_[i] + h0 * f_[i];
    // Linear predictor so reads past t0 have something to extrapolate.
    dense_.append(make_hermite_segment(t_, t_ + h0, y_, y1, f_, f_));
    State f1(n);
    ode_rhs(f1, y1, t_ + h0);
    dense_.pop_last();

    State df(n);
    for (std::size_t i = 0; i < n; ++i) df[i] = (f1[i] - f_[i]) / h0;
    const double d2 = wnorm(df);
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dmax, 1.0 / static_cast<double>(info_.order + 1));
    double dt = std::min(100.0 * h0, h1);
    dt = std::min({dt, span, opts_.dt_max});
    if (min_lag_) dt = std::min(dt, *min_lag_);
    if (!all_finite(f1) || !(dt > 0.0)) dt = std::min(1e-6, span);
    return dt;
}

StepResult DDEIntegrator::attempt(double dt) {
    switch (method_) {
        case Method::RK4: return step_explicit(rk4_tableau(), f_ode_, t_, y_, dt, &f_);
        case Method::Tsit5: return step_explicit(tsit5_tableau(), f_ode_, t_, y_, dt, &f_);
        case Method::Rosenbrock23: return step_rosenbrock(f_ode_, t_, y_, dt, jac_, f_, dfdt_);
    }
    return {};
}

// Fixed-point unknown: the step's end state and its stages scaled by dt, which
// together determine the segment polynomial.
std::vector<double> DDEIntegrator::pack(const StepResult& res, double dt) const {
    const std::size_t n = y_.size();
    const auto& stages = res.segment.stages;
    std::vector<double> z;
    z.reserve(n * (1 + stages.size()));
    z.insert(z.end(), res.y_new.begin(), res.y_new.end());
    for (const State& k : stages) {
        for (double v : k) z.push_back(dt * v);
    }
    return z;
}

SolutionSegment DDEIntegrator::unpack(const SolutionSegment& like, std::span<const double> z, double dt) const {
    const std::size_t n = y_.size();
    SolutionSegment seg = like;
    std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n), seg.y_right.begin());
    std::size_t off = n;
    for (State& k : seg.stages) {
        for (std::size_t i = 0; i < n; ++i) k[i] = z[off + i] / dt;
        off += n;
    }
    return seg;
}

std::vector<double> DDEIntegrator::fp_weights(const StepResult& res) const {
    const std::size_t n = y_.size();
    const std::size_t blocks = 1 + res.segment.stages.size();
    std::vector<double> w(n * blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            w[b * n + i] = opts_.atol_at(i) + opts_.rtol * std::max(std::abs(y_[i]), std::abs(res.y_new[i]));
        }
    }
    return w;
}

void DDEIntegrator::reject(double next_dt) {
    ++stats_.n_rejected;
    ++consecutive_rejects_;
    anderson_.clear();
    if (consecutive_rejects_ >= 2) jac_.mark_stale();
    dt_ = next_dt;
}

std::optional<double> DDEIntegrator::on_step_rejected(double t_right) {
    const DDEProblem& p = *prob_;
    if (p.dependent_lags.empty()) return std::nullopt;
    const auto found = scan_state_dependent(t_, t_right, agenda_.past(), p.dependent_lags, hist_,
                                            opts_.disc_scan_points, max_order_, &max_delay_seen_);
    if (!found) return std::nullopt;
    const double tol = agenda_.cluster_tol();
    if (!(found->t - t_ > tol) || !(t_right - found->t > tol)) return std::nullopt;
    const Discontinuity& src = agenda_.past()[found->source];
    agenda_.add_pending({found->t, p.neutral ? src.order : src.order + 1});
    return found->t;
}

DDEIntegrator::StepOutcome DDEIntegrator::perform_step(double dt_in, std::optional<double> target) {
    const double t_new = target ? *target : t_ + dt_in;
    const double dt = t_new - t_;
    const std::size_t n = y_.size();
    const double requested_dt = std::exchange(requested_dt_, 0.0);
    last_fp_iters_ = 0;
    last_extrapolated_ = false;

    hist_.reset_watermark(t_);

    bool installed = false;
    if (dense_.empty()) {
        // Nothing to extrapolate on the very first step: start from the tangent line.
        State y1(n);
        for (std::size_t i = 0; i < n; ++i) y1[i] = y_[i] + dt * f_[i];
        dense_.append(make_hermite_segment(t_, t_new, y_, y1, f_, f_));
        installed = true;
    }
    auto install = [&](SolutionSegment seg) {
        if (installed) {
            dense_.replace_last(std::move(seg));
        } else {
            dense_.append(std::move(seg));
            installed = true;
        }
    };
    auto uninstall = [&]() {
        if (installed) dense_.pop_last();
        installed = false;
    };

    if (info_.implicit) {
        try {
            if (jac_.needs_refresh(dt)) {
                Matrix jac;
                if (prob_->jacobian) {
                    jac = Matrix(n);
                    prob_->jacobian(jac.data, y_, hist_, prob_->params, t_);
                } else {
                    jac = compute_jacobian(f_ode_, t_, y_, f_);
                }
                ++stats_.n_jacobians;
                jac_.refresh(std::move(jac), dt, rosenbrock_gamma());
            }
        } catch (const DdeError& e) {
            if (e.code() != ErrorCode::SingularMatrix) throw;
            stats_.n_factorizations = jac_.n_factorizations();
            jac_.mark_stale();
            uninstall();
            reject(0.5 * dt);
            return StepOutcome::Rejected;
        }
        stats_.n_factorizations = jac_.n_factorizations();
        dfdt_ = time_derivative(f_ode_, t_, y_, f_);
        hist_.reset_watermark(t_);
    }

    StepResult res = attempt(dt);
    if (res.status != StepStatus::Ok) {
        uninstall();
        reject(0.25 * dt);
        return StepOutcome::Rejected;
    }
    res.segment.t_right = t_new;
    const bool extrapolated = hist_.extrapolation_used();
    last_extrapolated_ = extrapolated;

    if (extrapolated) {
        anderson_.clear();
        std::vector<double> z = pack(res, dt);
        install(res.segment);
        bool converged = false;
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= opts_.fp_max_iters; ++it) {
            StepResult next = attempt(dt);
            ++stats_.n_fp_iters;
            ++last_fp_iters_;
            if (next.status != StepStatus::Ok) break;
            next.segment.t_right = t_new;
            const std::vector<double> g = pack(next, dt);
            const std::vector<double> w = fp_weights(next);
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double d = (g[i] - z[i]) / w[i];
                acc += d * d;
            }
            const double change = std::sqrt(acc / static_cast<double>(g.size()));
            res = std::move(next);
            if (change <= opts_.fp_tol_factor) {
                converged = true;
                break;
            }
            // Contraction rate above 2 means the sweeps are running away.
            if (it > 1 && change > 2.0 * prev) break;
            prev = change;

            std::vector<double> z_next;
            if (anderson_.depth() > 0) {
                std::vector<double> zs(z.size());
                std::vector<double> gs(g.size());
                for (std::size_t i = 0; i < z.size(); ++i) {
                    zs[i] = z[i] / w[i];
                    gs[i] = g[i] / w[i];
                }
                z_next = anderson_.update(zs, gs);
                for (std::size_t i = 0; i < z_next.size(); ++i) z_next[i] *= w[i];
            } else {
                z_next = g;
            }
            install(unpack(res.segment, z_next, dt));
            z = std::move(z_next);
        }
        if (!converged) {
            ++stats_.n_fp_failures;
            uninstall();
            jac_.mark_stale();
            double next_dt = 0.5 * dt;
            if (min_lag_) next_dt = std::min(next_dt, *min_lag_);
            reject(next_dt);
            if (dt_ < dt_floor()) retcode_ = ReturnCode::FixedPointDivergence;
            return StepOutcome::Rejected;
        }
    }
    install(res.segment);

    double err = 0.0;
    if (method_ != Method::RK4) err = error_norm(res.err, y_, res.y_new, opts_.rtol, opts_.atol);
    if (defect_active_) {
        const State defect = residual_estimate(dense_.back(), f_ode_, opts_.defect_thetas);
        err = std::max(err, error_norm(defect, y_, res.y_new, opts_.rtol, opts_.atol));
    }

    if (!opts_.adaptive || err <= 1.0) {
        t_ = t_new;
        y_ = res.y_new;
        f_ = dense_.back().stages.back();
        ++stats_.n_accepted;
        consecutive_rejects_ = 0;
        times_.push_back(t_);
        extrapolated_.push_back(extrapolated);
        agenda_.advance(t_);
        if (!prob_->dependent_lags.empty()) {
            double horizon = max_delay_seen_;
            if (min_lag_) horizon = std::max(horizon, *std::max_element(prob_->constant_lags.begin(),
                                                                        prob_->constant_lags.end()));
            if (horizon > 0.0) agenda_.prune_past(t_, 2.0 * horizon);
        }
        if (opts_.adaptive) {
            double next = propose_dt(dt, err, info_.controller_order, true);
            // A step shortened to hit a stop says nothing against the size
            // the controller wanted before truncation.
            if (target && requested_dt > dt) next = std::max(next, requested_dt);
            dt_ = next;
        } else {
            dt_ = *opts_.dt_init;
        }
        return StepOutcome::Accepted;
    }

    const std::optional<double> located = on_step_rejected(t_new);
    uninstall();
    reject(located ? *located - t_ : propose_dt(dt, err, info_.controller_order, false));
    if (dt_ < dt_floor() && !located) retcode_ = ReturnCode::StepSizeUnderflow;
    return StepOutcome::Rejected;
}

bool DDEIntegrator::step() {
    if (retcode_) return false;
    if (t_ >= prob_->tf) {
        retcode_ = ReturnCode::Success;
        return false;
    }
    if (stats_.n_accepted + stats_.n_rejected >= opts_.max_steps) {
        retcode_ = ReturnCode::MaxSteps;
        return false;
    }
    double dt = std::min(dt_, opts_.dt_max);
    if (opts_.constrained && min_lag_) dt = std::min(dt, *min_lag_);
    const auto stop = agenda_.next_stop(t_, dt);
    requested_dt_ = dt;
    perform_step(stop.dt, stop.target);
    if (!retcode_ && t_ >= prob_->tf) retcode_ = ReturnCode::Success;
    return !retcode_;
}

DDESolution DDEIntegrator::finish() {
    while (step()) {
    }
    DDESolution sol;
    sol.problem = prob_;
    sol.method = method_;
    sol.retcode = retcode_.value_or(ReturnCode::Success);
    sol.stats = stats_;
    sol.t = times_;
    sol.extrapolated = extrapolated_;
    sol.dense = dense_;
    if (sol.success()) {
        for (double s : opts_.saveat) {
            if (s < prob_->t0 || s > prob_->tf) continue;
            sol.saveat_t.push_back(s);
            sol.saveat_x.push_back(sol.eval(s));
        }
    }
    return sol;
}

DDESolution solve(DDEProblem prob, Method method, SolverOptions opts) {
    DDEIntegrator integ(std::move(prob), method, std::move(opts));
    return integ.finish();
}

}  // namespace dde
