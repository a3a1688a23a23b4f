#include <doctest.h>

#include <cmath>
#include <limits>

#include "dde/stepper.hpp"
#include "oracles.hpp"

using namespace dde;

namespace {

OdeRhs linear(double lambda) {
    return [lambda](std::span<double> dx, std::span<const double> x, double) { dx[0] = lambda * x[0]; };
}

State eval_f(const OdeRhs& f, double t, const State& y) {
    State d(y.size());
    f(d, y, t);
    return d;
}

// Fixed-step integration with any shipped method; returns y(T).
State integrate_fixed(Method m, const OdeRhs& f, State y, double T, double dt, std::size_t* factorizations = nullptr) {
    const int steps = static_cast<int>(std::lround(T / dt));
    double t = 0.0;
    JacobianCache cache;
    for (int k = 0; k < steps; ++k) {
        const State f0 = eval_f(f, t, y);
        StepResult r;
        if (m == Method::Rosenbrock23) {
            if (cache.needs_refresh(dt)) cache.refresh(compute_jacobian(f, t, y, f0), dt, rosenbrock_gamma());
            const State dfdt = time_derivative(f, t, y, f0);
            r = step_rosenbrock(f, t, y, dt, cache, f0, dfdt);
        } else {
            r = step_explicit(m == Method::RK4 ? rk4_tableau() : tsit5_tableau(), f, t, y, dt, &f0);
        }
        REQUIRE(r.status == StepStatus::Ok);
        y = r.y_new;
        t += dt;
    }
    if (factorizations) *factorizations = cache.n_factorizations();
    return y;
}

}  // namespace

TEST_CASE("shipped tableaus are consistent") {
    CHECK(check_tableau(rk4_tableau()).empty());
    CHECK(check_tableau(tsit5_tableau()).empty());
    std::vector<double> w;
    tsit5_tableau().dense_weights(1.0, w);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == doctest::Approx(tsit5_tableau().b[i]).epsilon(1e-14));
}

TEST_CASE("rk4 matches the hand-written update") {
    const StepResult r = step_explicit(rk4_tableau(), linear(1.0), 0.0, State{1.0}, 0.1);
    const double expected = oracle::rk4_scalar([](double, double y) { return y; }, 0.0, 1.0, 0.1);
    CHECK(r.y_new[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(std::abs(r.y_new[0] - 1.1051708333333333) <= 1e-15);
}

TEST_CASE("zero field leaves the state unchanged") {
    const OdeRhs zero = [](std::span<double> dx, std::span<const double>, double) { dx[0] = 0.0; };
    for (const ButcherTableau* tab : {&rk4_tableau(), &tsit5_tableau()}) {
        const StepResult r = step_explicit(*tab, zero, 0.0, State{3.5}, 0.1);
        CHECK(r.y_new[0] == 3.5);
        CHECK(r.err[0] == 0.0);
    }
    JacobianCache cache;
    cache.refresh(compute_jacobian(zero, 0.0, State{3.5}, State{0.0}), 0.1, rosenbrock_gamma());
    const StepResult r = step_rosenbrock(zero, 0.0, State{3.5}, 0.1, cache, State{0.0}, State{0.0});
    CHECK(r.y_new[0] == 3.5);
    CHECK(r.err[0] == 0.0);
}

TEST_CASE("tsit5 single step on exponential growth") {
    const StepResult r = step_explicit(tsit5_tableau(), linear(1.0), 0.0, State{1.0}, 0.1);
    CHECK(std::abs(r.y_new[0] - std::exp(0.1)) <= 1e-9);
    CHECK(r.segment.t_left == 0.0);
    CHECK(r.segment.y_left == State{1.0});
    CHECK(r.segment.y_right == r.y_new);
}

TEST_CASE("non-finite stages are reported, not thrown") {
    const OdeRhs bad = [](std::span<double> dx, std::span<const double>, double) {
        dx[0] = std::numeric_limits<double>::quiet_NaN();
    };
    CHECK(step_explicit(tsit5_tableau(), bad, 0.0, State{1.0}, 0.1).status == StepStatus::NonFiniteState);
}

TEST_CASE("rosenbrock stays stable on stiff decay") {
    const OdeRhs f = linear(-1000.0);
    JacobianCache cache;
    const State f0 = eval_f(f, 0.0, {1.0});
    cache.refresh(compute_jacobian(f, 0.0, State{1.0}, f0), 0.01, rosenbrock_gamma());
    const StepResult r = step_rosenbrock(f, 0.0, State{1.0}, 0.01, cache, f0, State{0.0});
    // Stability function of the two-stage scheme, (1 + (1 - 2d) z) / (1 - d z)^2.
    const double z = -10.0, d = 1.0 - 1.0 / std::sqrt(2.0);
    CHECK(r.y_new[0] == doctest::Approx((1 + (1 - 2 * d) * z) / ((1 - d * z) * (1 - d * z))).epsilon(1e-12));
    CHECK(std::abs(r.y_new[0]) < 1.0);

    const State explicit_end = integrate_fixed(Method::RK4, f, {1.0}, 1.0, 0.01);
    CHECK(std::abs(explicit_end[0]) > 1e10);
    const State implicit_end = integrate_fixed(Method::Rosenbrock23, f, {1.0}, 1.0, 0.01);
    CHECK(std::abs(implicit_end[0]) < 1.0);
}

TEST_CASE("rosenbrock is second order on a rotation") {
    const OdeRhs f = [](std::span<double> dx, std::span<const double> x, double) {
        dx[0] = x[1];
        dx[1] = -x[0];
    };
    auto error_at = [&](double dt) {
        const State y = integrate_fixed(Method::Rosenbrock23, f, {1.0, 0.0}, 1.0, dt);
        // exp(A t) (1, 0) = (cos t, -sin t)
        return std::hypot(y[0] - std::cos(1.0), y[1] + std::sin(1.0));
    };
    const double ratio = error_at(0.1) / error_at(0.05);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("rosenbrock damps very stiff modes in one step") {
    const OdeRhs f = linear(-1e6);
    JacobianCache cache;
    const State f0 = eval_f(f, 0.0, {1.0});
    cache.refresh(compute_jacobian(f, 0.0, State{1.0}, f0), 1.0, rosenbrock_gamma());
    const StepResult r = step_rosenbrock(f, 0.0, State{1.0}, 1.0, cache, f0, State{0.0});
    CHECK(std::abs(r.y_new[0]) < 1.0);
}

TEST_CASE("factorization is reused at constant dt") {
    const OdeRhs f = [](std::span<double> dx, std::span<const double> x, double) {
        dx[0] = -500.0 * x[0] + x[1];
        dx[1] = -2.0 * x[1];
    };
    std::size_t nfact = 0;
    (void)integrate_fixed(Method::Rosenbrock23, f, {1.0, 1.0}, 1.0, 0.01, &nfact);
    CHECK(nfact <= 2);
}

TEST_CASE("finite-difference jacobian") {
    const OdeRhs f = [](std::span<double> dx, std::span<const double> x, double) {
        dx[0] = x[0] * x[0];
        dx[1] = x[0] * x[1];
    };
    const State y{1.0, 2.0};
    const Matrix j = compute_jacobian(f, 0.0, y, eval_f(f, 0.0, y));
    CHECK(std::abs(j(0, 0) - 2.0) <= 1e-6);
    CHECK(std::abs(j(0, 1) - 0.0) <= 1e-6);
    CHECK(std::abs(j(1, 0) - 2.0) <= 1e-6);
    CHECK(std::abs(j(1, 1) - 1.0) <= 1e-6);

    const OdeRhs c = [](std::span<double> dx, std::span<const double>, double) { dx[0] = 4.0; };
    const Matrix z = compute_jacobian(c, 0.0, State{3.0}, State{4.0});
    CHECK(z(0, 0) == 0.0);
}

TEST_CASE("weighted rms norm") {
    const State zero2{0.0, 0.0};
    CHECK(error_norm(zero2, zero2, zero2, 1e-3, State{1e-6}) == 0.0);
    CHECK(error_norm(State{1e-6}, State{5.0}, State{7.0}, 0.0, State{1e-6}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(error_norm(State{3e-6, 4e-6}, zero2, zero2, 0.0, State{1e-6}) ==
          doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));
}

TEST_CASE("step size proposals") {
    CHECK(propose_dt(1.0, 1.0, 4, true) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(propose_dt(1.0, 0.0, 4, true) == 5.0);
    CHECK(propose_dt(1.0, 1e6, 4, false) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(propose_dt(1.0, 1e-12, 4, false) <= 1.0);
}

TEST_CASE("defect of exact and corrupted segments") {
    const OdeRhs one = [](std::span<double> dx, std::span<const double>, double) { dx[0] = 1.0; };
    const auto lin = make_hermite_segment(0.0, 1.0, {0.0}, {1.0}, {1.0}, {1.0});
    const State thetas{0.3, 0.7};
    CHECK(residual_estimate(lin, one, thetas)[0] == doctest::Approx(0.0).epsilon(1e-15));

    const OdeRhs three_t2 = [](std::span<double> dx, std::span<const double>, double t) { dx[0] = 3 * t * t; };
    const auto cube = make_hermite_segment(0.0, 1.0, {0.0}, {1.0}, {0.0}, {3.0});
    CHECK(std::abs(residual_estimate(cube, three_t2, thetas)[0]) <= 1e-14);

    const OdeRhs zero = [](std::span<double> dx, std::span<const double>, double) { dx[0] = 0.0; };
    const auto bent = make_hermite_segment(0.0, 1.0, {0.0}, {1e-3}, {0.0}, {0.0});
    CHECK(residual_estimate(bent, zero, thetas)[0] >= 1e-4);
}

TEST_CASE("observed convergence orders on x' = -x") {
    const OdeRhs f = linear(-1.0);
    for (Method m : all_methods()) {
        const int p = method_info(m).order;
        auto err = [&](double dt) { return std::abs(integrate_fixed(m, f, {1.0}, 1.0, dt)[0] - std::exp(-1.0)); };
        const double e1 = err(0.1), e2 = err(0.05), e3 = err(0.025);
        INFO(method_info(m).name);
        CHECK(std::abs(std::log2(e1 / e2) - p) <= 0.5);
        CHECK(std::abs(std::log2(e2 / e3) - p) <= 0.5);
    }
}

TEST_CASE("method ids round-trip") {
    for (Method m : all_methods()) CHECK(parse_method(method_info(m).name) == m);
    CHECK_FALSE(parse_method("euler").has_value());
}
