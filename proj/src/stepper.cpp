#include "dde/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dde {

MethodInfo method_info(Method m) {
    switch (m) {
        case Method::RK4: return {"rk4", 4, 3, false, InterpKind::Hermite};
        case Method::Tsit5: return {"tsit5", 5, 4, false, InterpKind::Tsit5};
        case Method::Rosenbrock23: return {"rosenbrock23", 2, 2, true, InterpKind::Hermite};
    }
    return {"?", 0, 0, false, InterpKind::Hermite};
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : all_methods()) {
        if (method_info(m).name == name) return m;
    }
    return std::nullopt;
}

std::vector<Method> all_methods() { return {Method::RK4, Method::Tsit5, Method::Rosenbrock23}; }

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

StepResult step_explicit(const ButcherTableau& tab, const OdeRhs& f, double t, std::span<const double> y, double dt,
                         const State* f0) {
    const std::size_t n = y.size();
    const std::size_t s = tab.stages;
    StepResult res;
    std::vector<State> k(s, State(n));
    State tmp(n);

    for (std::size_t i = 0; i < s; ++i) {
        if (i == 0 && f0 != nullptr) {
            k[0] = *f0;
            continue;
        }
        for (std::size_t c = 0; c < n; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < i; ++j) acc += tab.a[i][j] * k[j][c];
            tmp[c] = y[c] + dt * acc;
        }
        f(k[i], tmp, t + tab.c[i] * dt);
        ++res.n_rhs;
        if (!all_finite(k[i])) {
            res.status = StepStatus::NonFiniteState;
            return res;
        }
    }

    res.y_new.resize(n);
    res.err.assign(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        double eacc = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            acc += tab.b[j] * k[j][c];
            eacc += (tab.b[j] - tab.b_hat[j]) * k[j][c];
        }
        res.y_new[c] = y[c] + dt * acc;
        if (tab.has_embedded) res.err[c] = dt * eacc;
    }
    if (tab.fsal) {
        // The last stage sits at (t + dt, y + dt * sum b k) already.
        res.y_new = State(tmp.begin(), tmp.end());
    }
    if (!all_finite(res.y_new)) {
        res.status = StepStatus::NonFiniteState;
        return res;
    }

    SolutionSegment& seg = res.segment;
    seg.t_left = t;
    seg.t_right = t + dt;
    seg.y_left.assign(y.begin(), y.end());
    seg.y_right = res.y_new;
    if (tab.has_dense()) {
        seg.kind = InterpKind::Tsit5;
        seg.stages = std::move(k);
    } else {
        State f_right(n);
        f(f_right, res.y_new, t + dt);
        ++res.n_rhs;
        if (!all_finite(f_right)) {
            res.status = StepStatus::NonFiniteState;
            return res;
        }
        seg.kind = InterpKind::Hermite;
        seg.stages = {std::move(k[0]), std::move(f_right)};
    }
    return res;
}

bool JacobianCache::needs_refresh(double dt) const {
    if (stale_ || !has_fac_) return true;
    const double ratio = dt / dt_;
    return ratio > refresh_ratio || ratio < 1.0 / refresh_ratio;
}

void JacobianCache::refresh(Matrix jac, double dt, double gamma) {
    jac_ = std::move(jac);
    stale_ = false;
    refactor(dt, gamma);
}

void JacobianCache::refactor(double dt, double gamma) {
    const std::size_t n = jac_.n;
    Matrix w = Matrix::identity(n);
    for (std::size_t i = 0; i < n * n; ++i) w.data[i] -= gamma * dt * jac_.data[i];
    // Row equilibration: stiff rows can dwarf the identity part by many
    // orders of magnitude, which would trip the relative pivot test.
    row_scale_.assign(n, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        double m = 0.0;
        for (std::size_t c = 0; c < n; ++c) m = std::max(m, std::abs(w(r, c)));
        if (m > 0.0 && std::isfinite(m)) row_scale_[r] = 1.0 / m;
        for (std::size_t c = 0; c < n; ++c) w(r, c) *= row_scale_[r];
    }
    has_fac_ = false;
    ++n_fact_;
    lu_ = lu_factorize(w);
    dt_ = dt;
    has_fac_ = true;
}

void JacobianCache::solve(std::span<double> b) const {
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= row_scale_[i];
    lu_solve(lu_, b);
}

Matrix compute_jacobian(const OdeRhs& f, double t, std::span<const double> y, std::span<const double> f0,
                        std::size_t* n_rhs) {
    const std::size_t n = y.size();
    Matrix jac(n);
    State yp(y.begin(), y.end());
    State fp(n);
    const double sq = std::sqrt(std::numeric_limits<double>::epsilon());
    for (std::size_t j = 0; j < n; ++j) {
        const double h = sq * std::max(std::abs(y[j]), 1.0);
        const double saved = yp[j];
        yp[j] = saved + h;
        const double hh = yp[j] - saved;
        f(fp, yp, t);
        if (n_rhs) ++*n_rhs;
        yp[j] = saved;
        for (std::size_t i = 0; i < n; ++i) jac(i, j) = (fp[i] - f0[i]) / hh;
    }
    return jac;
}

State time_derivative(const OdeRhs& f, double t, std::span<const double> y, std::span<const double> f0,
                      std::size_t* n_rhs) {
    const std::size_t n = y.size();
    const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(t), 1.0);
    const double tm = t - h;
    State fm(n);
    f(fm, y, tm);
    if (n_rhs) ++*n_rhs;
    State d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (f0[i] - fm[i]) / (t - tm);
    return d;
}

double rosenbrock_gamma() { return 1.0 / (2.0 + std::sqrt(2.0)); }

StepResult step_rosenbrock(const OdeRhs& f, double t, std::span<const double> y, double dt, const JacobianCache& cache,
                           std::span<const double> f0, std::span<const double> dfdt) {
    const std::size_t n = y.size();
    const double d = rosenbrock_gamma();
    const double e32 = 6.0 + std::sqrt(2.0);
    StepResult res;

    State k1(n);
    for (std::size_t i = 0; i < n; ++i) k1[i] = f0[i] + (dfdt.empty() ? 0.0 : dt * d * dfdt[i]);
    cache.solve(k1);

    State tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    State f1(n);
    f(f1, tmp, t + 0.5 * dt);
    ++res.n_rhs;
    if (!all_finite(f1)) {
        res.status = StepStatus::NonFiniteState;
        return res;
    }

    State k2(n);
    for (std::size_t i = 0; i < n; ++i) k2[i] = f1[i] - k1[i];
    cache.solve(k2);
    for (std::size_t i = 0; i < n; ++i) k2[i] += k1[i];

    res.y_new.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.y_new[i] = y[i] + dt * k2[i];
    if (!all_finite(res.y_new)) {
        res.status = StepStatus::NonFiniteState;
        return res;
    }

    State f2(n);
    f(f2, res.y_new, t + dt);
    ++res.n_rhs;
    if (!all_finite(f2)) {
        res.status = StepStatus::NonFiniteState;
        return res;
    }

    State k3(n);
    for (std::size_t i = 0; i < n; ++i) {
        k3[i] = f2[i] - e32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]) + (dfdt.empty() ? 0.0 : dt * d * dfdt[i]);
    }
    cache.solve(k3);

    res.err.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.err[i] = dt / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]);

    res.segment = make_hermite_segment(t, t + dt, State(y.begin(), y.end()), res.y_new, State(f0.begin(), f0.end()),
                                       std::move(f2));
    return res;
}

double error_norm(std::span<const double> err, std::span<const double> y_old, std::span<const double> y_new,
                  double rtol, std::span<const double> atol) {
    const std::size_t n = err.size();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = atol.size() == 1 ? atol[0] : atol[i];
        const double scale = a + rtol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
        const double e = err[i] / scale;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double propose_dt(double dt, double err, int controller_order, bool accepted, const ControllerParams& p) {
    const double qmax = accepted ? p.qmax : 1.0;
    double q;
    if (err == 0.0) {
        q = qmax;
    } else if (!std::isfinite(err)) {
        q = p.qmin;
    } else {
        q = p.safety * std::pow(err, -1.0 / static_cast<double>(controller_order + 1));
    }
    return dt * std::min(qmax, std::max(p.qmin, q));
}

State residual_estimate(const SolutionSegment& seg, const OdeRhs& f, std::span<const double> thetas,
                        std::size_t* n_rhs) {
    const std::size_t n = seg.dim();
    const double h = seg.length();
    State out(n, 0.0);
    State x(n);
    State dx(n);
    State fx(n);
    for (double th : thetas) {
        const double t = seg.t_left + th * h;
        seg.eval(t, x);
        seg.eval_derivative(t, dx);
        f(fx, x, t);
        if (n_rhs) ++*n_rhs;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(dx[i] - fx[i]);
            // NaN must win over any finite sample.
            if (!(d <= out[i])) out[i] = d;
        }
    }
    for (double& v : out) v *= h;
    return out;
}

}  // namespace dde
