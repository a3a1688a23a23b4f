#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "dde/discontinuity.hpp"
#include "oracles.hpp"

using namespace dde;

namespace {

// A scalar problem whose dense solution is the constant 1 on [0, 2]; the
// scan only needs something to evaluate the lag functions against.
struct ScanFixture {
    DDEProblem prob;
    DenseSolution sol{0.0};
    std::unique_ptr<HistoryAccessor> acc;

    ScanFixture() {
        prob.rhs = [](std::span<double> dx, std::span<const double>, HistoryAccessor&, const Params&, double) {
            dx[0] = 0.0;
        };
        prob.history = [](const Params&, double) { return State{1.0}; };
        prob.tf = 2.0;
        prob = validate_problem(prob);
        sol.append(make_hermite_segment(0.0, 2.0, {1.0}, {1.0}, {0.0}, {0.0}));
        acc = std::make_unique<HistoryAccessor>(sol, prob, State{1.0});
    }
};

std::vector<double> times_of(const std::vector<Discontinuity>& d) {
    std::vector<double> t;
    for (const auto& e : d) t.push_back(e.t);
    return t;
}

}  // namespace

TEST_CASE("single lag gives an arithmetic progression of orders") {
    const double lag = 1.0;
    const auto d = propagate_constant(0.0, std::span(&lag, 1), 0, 5, false, 10.0, 1e-12);
    REQUIRE(d.size() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(d[k].t == k + 1.0);
        CHECK(d[k].order == k + 1);
    }
}

TEST_CASE("one third and one cluster into a single stop at 1") {
    const std::vector<double> lags{1.0 / 3.0, 1.0};
    const auto d = propagate_constant(0.0, lags, 0, 3, false, 2.0, 1e-12);
    int near_one = 0;
    for (const auto& e : d) {
        if (std::abs(e.t - 1.0) <= 1e-9) {
            ++near_one;
            CHECK(e.order == 1);
        }
    }
    CHECK(near_one == 1);
}

TEST_CASE("neutral problems keep the order") {
    const double lag = 1.0;
    const auto d = propagate_constant(0.0, std::span(&lag, 1), 0, 2, true, 3.0, 1e-12);
    CHECK(times_of(d) == std::vector<double>{1.0, 2.0, 3.0});
    for (const auto& e : d) CHECK(e.order == 0);
}

TEST_CASE("no lags, no discontinuities") {
    CHECK(propagate_constant(0.0, {}, 0, 5, false, 10.0, 1e-12).empty());
}

TEST_CASE("property: propagated times are sorted, separated and inside the span") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> lagd(0.05, 2.0);
    std::uniform_int_distribution<int> count(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> lags(count(rng));
        for (auto& l : lags) l = lagd(rng);
        const double t0 = trial * 0.1;
        const double tf = t0 + 6.0;
        const double tol = 1e-10;
        const auto d = propagate_constant(t0, lags, 0, 5, false, tf, tol);
        for (std::size_t k = 0; k < d.size(); ++k) {
            CHECK(d[k].t > t0);
            CHECK(d[k].t <= tf);
            CHECK(d[k].order <= 5);
            if (k > 0) CHECK(d[k].t - d[k - 1].t > tol);
        }
    }
}

TEST_CASE("property: single-lag times are exact multiples") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> lagd(0.1, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double lag = lagd(rng);
        const double t0 = 0.25 * trial;
        const auto d = propagate_constant(t0, std::span(&lag, 1), 0, 5, false, t0 + 100.0, 1e-12);
        REQUIRE(d.size() == 5);
        for (int k = 0; k < 5; ++k) CHECK(d[k].t == t0 + (k + 1) * lag);
    }
}

TEST_CASE("scan finds a constant unit delay") {
    ScanFixture fx;
    const std::vector<LagFn> lags{[](std::span<const double>, const Params&, double) { return 1.0; }};
    const std::vector<Discontinuity> past{{0.0, 0}};
    const auto r = scan_state_dependent(0.5, 1.5, past, lags, *fx.acc, 10, 5);
    REQUIRE(r.has_value());
    CHECK(std::abs(r->t - 1.0) <= 1e-10);
    CHECK(r->source == 0);
}

TEST_CASE("scan rejects a lag that turns negative") {
    // tau = t/2 on [-0.5, 1.5] is negative on the left of the interval, and
    // the solver treats negative delays as errors.
    ScanFixture fx;
    const std::vector<LagFn> lags{[](std::span<const double>, const Params&, double t) { return t / 2; }};
    const std::vector<Discontinuity> past{{0.0, 0}};
    CHECK_THROWS_AS((void)scan_state_dependent(-0.5, 1.5, past, lags, *fx.acc, 10, 5), DdeError);
}

TEST_CASE("scan locates the sinusoidal delay root") {
    ScanFixture fx;
    const std::vector<LagFn> lags{[](std::span<const double>, const Params&, double t) {
        return 1.0 + 0.5 * std::sin(std::numbers::pi * t);
    }};
    const std::vector<Discontinuity> past{{0.0, 0}};
    const auto r = scan_state_dependent(0.5, 2.0, past, lags, *fx.acc, 10, 5);
    REQUIRE(r.has_value());
    const double expected =
        oracle::grid_bisect([](double t) { return t - 1.0 - 0.5 * std::sin(std::numbers::pi * t); }, 0.5, 2.0);
    CHECK(std::abs(r->t - expected) <= 1e-8);
    // g(1) = -0.5 sin(pi) vanishes and g is increasing there, so 1 is the only root.
    CHECK(std::abs(r->t - 1.0) <= 1e-10);
}

TEST_CASE("property: scan results stay inside the interval") {
    ScanFixture fx;
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng), amp = 0.9 * u(rng), freq = 1 + 5 * u(rng);
        const std::vector<LagFn> lags{[=](std::span<const double>, const Params&, double t) {
            return a + amp * (1 + std::sin(freq * t));
        }};
        const std::vector<Discontinuity> past{{0.0, 0}, {0.3 * u(rng), 1}};
        const double ta = 0.4 + u(rng);
        const double tb = ta + 0.01 + u(rng);
        const auto r = scan_state_dependent(ta, std::min(tb, 2.0), past, lags, *fx.acc, 10, 5);
        if (r) {
            CHECK(r->t >= ta);
            CHECK(r->t <= std::min(tb, 2.0));
        }
    }
}

TEST_CASE("next stop truncates to land exactly") {
    DiscontinuityAgenda ag(1e-12);
    ag.add_pending({1.0, 1});
    const auto s = ag.next_stop(0.7, 0.5);
    REQUIRE(s.target.has_value());
    CHECK(*s.target == 1.0);
    CHECK(s.dt == doctest::Approx(0.3).epsilon(1e-15));

    const auto far = ag.next_stop(0.2, 0.5);
    CHECK_FALSE(far.target.has_value());
    CHECK(far.dt == 0.5);
}

TEST_CASE("nearly coincident stops merge") {
    DiscontinuityAgenda ag(1e-12);
    CHECK(ag.add_pending({1.0, 3}));
    CHECK_FALSE(ag.add_pending({1.0 + 1e-16, 1}));
    REQUIRE(ag.pending().size() == 1);
    CHECK(ag.pending()[0].order == 1);
}

TEST_CASE("user stops are landed on and consumed") {
    DiscontinuityAgenda ag(1e-12);
    ag.add_user_stop(0.75);
    ag.add_pending({1.0, 1});
    const auto s = ag.next_stop(0.5, 1.0);
    REQUIRE(s.target.has_value());
    CHECK(*s.target == 0.75);
    ag.advance(0.75);
    CHECK(ag.user_stops().empty());
    CHECK(ag.next_time_after(0.75) == 1.0);
    ag.advance(1.0);
    CHECK(ag.pending().empty());
    REQUIRE(ag.past().size() == 1);
    CHECK(ag.past()[0].t == 1.0);
}

TEST_CASE("pruning forgets old past points") {
    DiscontinuityAgenda ag(1e-12);
    ag.add_past({0.0, 0});
    ag.add_past({5.0, 1});
    ag.prune_past(10.0, 6.0);
    REQUIRE(ag.past().size() == 1);
    CHECK(ag.past()[0].t == 5.0);
}
