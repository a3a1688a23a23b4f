#include "dde/problems.hpp"

#include <algorithm>
#include <cmath>

#include "dde/dense_solution.hpp"

namespace dde::problems {

HutchinsonExact::HutchinsonExact(int intervals) {
    // x = 1 before 0, so the first piece integrates the constant -1.
    std::vector<double> prev = {1.0};
    double prev_end = 1.0;
    for (int k = 0; k < intervals; ++k) {
        std::vector<double> cur(prev.size() + 1, 0.0);
        cur[0] = prev_end;
        for (std::size_t j = 0; j < prev.size(); ++j) cur[j + 1] = -prev[j] / static_cast<double>(j + 1);
        coeffs_.push_back(cur);
        prev = cur;
        prev_end = 0.0;
        for (double c : cur) prev_end += c;
    }
}

double HutchinsonExact::operator()(double t) const {
    if (t <= 0.0) return 1.0;
    auto k = static_cast<std::size_t>(std::floor(t));
    if (k >= coeffs_.size()) k = coeffs_.size() - 1;
    if (static_cast<double>(k) == t && k > 0) --k;
    const double s = t - static_cast<double>(k);
    const auto& c = coeffs_[k];
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * s + c[j];
    return acc;
}

NamedProblem hutchinson() {
    NamedProblem np;
    np.id = "hutchinson";
    np.description = "x'(t) = -x(t-1), x(t) = 1 for t <= 0";
    DDEProblem& p = np.problem;
    p.rhs = [](std::span<double> dx, std::span<const double>, HistoryAccessor& h, const Params&, double t) {
        dx[0] = -h(t - 1.0, 0);
    };
    p.history = [](const Params&, double) { return State{1.0}; };
    p.t0 = 0.0;
    p.tf = 10.0;
    p.constant_lags = {1.0};
    p.jacobian = [](std::span<double> jac, std::span<const double>, HistoryAccessor&, const Params&, double) {
        jac[0] = 0.0;
    };
    np.method = Method::Tsit5;
    np.rtol = 1e-6;
    np.atol = {1e-9};
    np.reference = ReferenceKind::Analytic;
    const HutchinsonExact exact(10);
    np.analytic = [exact](double t) { return State{exact(t)}; };
    return np;
}

NamedProblem mackey_glass(const MackeyGlassParams& mg) {
    NamedProblem np;
    np.id = "mackey_glass";
    np.description = "Mackey-Glass blood cell model (chaotic for the default parameters)";
    DDEProblem& p = np.problem;
    p.params = {mg.lambda, mg.theta, mg.n, mg.tau, mg.gamma};
    p.rhs = [](std::span<double> dx, std::span<const double> x, HistoryAccessor& h, const Params& q, double t) {
        const double lambda = q[0];
        const double theta_n = std::pow(q[1], q[2]);
        const double xd = h(t - q[3], 0);
        dx[0] = lambda * theta_n * xd / (theta_n + std::pow(xd, q[2])) - q[4] * x[0];
    };
    const double x0 = mg.x0;
    p.history = [x0](const Params&, double) { return State{x0}; };
    p.t0 = 0.0;
    p.tf = 600.0;
    p.constant_lags = {mg.tau};
    np.method = Method::Tsit5;
    np.rtol = 1e-6;
    np.atol = {1e-9};
    np.reference = ReferenceKind::SelfReference;
    if (mg.lambda == 0.0) {
        np.reference = ReferenceKind::Analytic;
        const double g = mg.gamma;
        np.analytic = [x0, g](double t) { return State{x0 * std::exp(-g * t)}; };
    }
    return np;
}

NamedProblem two_delay_linear() {
    NamedProblem np;
    np.id = "two_delay_linear";
    np.description = "x'(t) = -x(t-1/3) - x(t-1/5), x(t) = 0 for t < 0, x(0) = 1";
    DDEProblem& p = np.problem;
    p.rhs = [](std::span<double> dx, std::span<const double>, HistoryAccessor& h, const Params&, double t) {
        dx[0] = -h(t - 1.0 / 3.0, 0) - h(t - 1.0 / 5.0, 0);
    };
    p.history = [](const Params&, double) { return State{0.0}; };
    p.x0 = State{1.0};
    p.t0 = 0.0;
    p.tf = 100.0;
    p.constant_lags = {1.0 / 3.0, 1.0 / 5.0};
    np.method = Method::Tsit5;
    np.rtol = 1e-3;
    np.atol = {1e-6};
    np.reference = ReferenceKind::SelfReference;
    return np;
}

NamedProblem waltman(bool add_tstops) {
    NamedProblem np;
    np.id = "waltman";
    np.description = "Waltman antigen stimulated antibody production model";
    DDEProblem& p = np.problem;
    // alpha, beta, gamma, r, s, t1, t2
    p.params = {1.8, 20.0, 0.002, 5e4, 1e5, 35.0, 197.0};
    p.rhs = [](std::span<double> dx, std::span<const double> x, HistoryAccessor& h, const Params& q, double t) {
        const double alpha = q[0];
        const double beta = q[1];
        const double gamma = q[2];
        const double r = q[3];
        const double s = q[4];
        const double h1 = t - q[5] >= 0.0 ? 1.0 : 0.0;
        const double h2 = t - q[6] >= 0.0 ? 1.0 : 0.0;

        const double u5 = x[4];
        const double u6 = x[5];
        const double x1_5 = h(u5, 0);
        const double x2_5 = h(u5, 1);
        const double x3_5 = h(u5, 2);
        const double x1_6 = h(u6, 0);
        const double x2_6 = h(u6, 1);
        const double x3_6 = h(u6, 2);

        const double x1x2 = x[0] * x[1];
        dx[0] = -r * x1x2 - s * x[0] * x[3];
        dx[1] = -r * x1x2 + alpha * r * x1_5 * x2_5 * h1;
        dx[2] = r * x1x2;
        dx[3] = -s * x[0] * x[3] - gamma * x[3] + beta * r * x1_6 * x2_6 * h2;
        dx[4] = h1 * (x1x2 + x[2]) / (x1_5 * x2_5 + x3_5);
        dx[5] = h2 * (1e-12 + x[1] + x[2]) / (1e-12 + x2_6 + x3_6);
    };
    p.history = [](const Params&, double) { return State{5e-6, 1e-15, 0.0, 0.0, 0.0, 0.0}; };
    p.t0 = 0.0;
    p.tf = 300.0;
    // The delays vanish as x5, x6 approach t, and within tolerance the
    // computed arguments can run slightly ahead of t.
    p.dependent_lags = {
        [](std::span<const double> x, const Params&, double t) { return std::max(0.0, t - x[4]); },
        [](std::span<const double> x, const Params&, double t) { return std::max(0.0, t - x[5]); },
    };
    np.method = Method::Rosenbrock23;
    np.rtol = 1e-9;
    np.atol = {1e-21, 1e-21, 1e-21, 1e-21, 1e-9, 1e-9};
    np.reference = ReferenceKind::SelfReference;
    if (add_tstops) np.tstops = {p.params[5], p.params[6]};
    return np;
}

std::vector<std::string> problem_ids() { return {"hutchinson", "mackey_glass", "two_delay_linear", "waltman"}; }

NamedProblem make_problem(std::string_view id) {
    if (id == "hutchinson") return hutchinson();
    if (id == "mackey_glass") return mackey_glass();
    if (id == "two_delay_linear") return two_delay_linear();
    if (id == "waltman") return waltman();
    throw DdeError(ErrorCode::UnknownProblem, std::string(id));
}

}  // namespace dde::problems
