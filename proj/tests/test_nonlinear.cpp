#include <doctest.h>

#include <cmath>
#include <random>

#include "dde/nonlinear.hpp"
#include "dde/types.hpp"
#include "oracles.hpp"

using namespace dde;

namespace {

constexpr double dottie = 0.7390851332151607;

// Iterates x <- update(x, g(x)) until |x - fixed| <= tol.
template <class G>
int anderson_iterations(AndersonState& st, std::vector<double> x, G g, const std::vector<double>& fixed, double tol,
                        int cap = 200) {
    for (int k = 1; k <= cap; ++k) {
        x = st.update(x, g(x));
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - fixed[i]));
        if (d <= tol) return k;
    }
    return cap + 1;
}

}  // namespace

TEST_CASE("lu solves small systems") {
    const LUFactors id = lu_factorize(Matrix::identity(2));
    const std::vector<double> b{3.0, 4.0};
    CHECK(lu_solve(id, b) == b);

    Matrix a(2);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 3;
    const auto x = lu_solve(lu_factorize(a), b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rank one matrix is singular") {
    Matrix a(2, 1.0);
    try {
        (void)lu_factorize(a);
        FAIL("expected SingularMatrix");
    } catch (const DdeError& e) {
        CHECK(e.code() == ErrorCode::SingularMatrix);
    }
}

TEST_CASE("property: lu inverts random well-conditioned matrices") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix a(5);
        for (auto& v : a.data) v = u(rng);
        for (std::size_t i = 0; i < 5; ++i) a(i, i) += 6.0;  // diagonally dominant
        std::vector<double> b(5);
        for (auto& v : b) v = u(rng);
        const auto x = lu_solve(lu_factorize(a), std::span<const double>(b));
        double rnorm = 0.0, bnorm = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            double ax = 0.0;
            for (std::size_t j = 0; j < 5; ++j) ax += a(i, j) * x[j];
            rnorm = std::max(rnorm, std::abs(ax - b[i]));
            bnorm = std::max(bnorm, std::abs(b[i]));
        }
        CHECK(rnorm <= 1e-10 * bnorm);
    }
}

TEST_CASE("depth zero is a plain picard step") {
    AndersonState st(0);
    const std::vector<double> x{1.0};
    const auto next = st.update(x, std::vector<double>{std::cos(1.0)});
    CHECK(next[0] == std::cos(1.0));
}

TEST_CASE("property: depth zero is bit-identical to picard") {
    AndersonState st(0);
    double picard = 1.0;
    std::vector<double> x{1.0};
    for (int k = 0; k < 40; ++k) {
        x = st.update(x, std::vector<double>{std::cos(x[0])});
        picard = std::cos(picard);
        CHECK(x[0] == picard);
    }
}

TEST_CASE("anderson accelerates the cosine map") {
    auto g = [](const std::vector<double>& x) { return std::vector<double>{std::cos(x[0])}; };
    AndersonState st(2);
    const int accel = anderson_iterations(st, {1.0}, g, {dottie}, 1e-10);
    const int plain = oracle::picard_iterations([](double x) { return std::cos(x); }, 1.0, dottie, 1e-10);
    CHECK(accel <= 10);
    CHECK(plain > 25);
}

TEST_CASE("anderson is exact on an affine contraction") {
    auto g = [](const std::vector<double>& x) { return std::vector<double>{0.5 * x[0] + 1.0}; };
    AndersonState st(1);
    CHECK(anderson_iterations(st, {0.0}, g, {2.0}, 1e-12) <= 3);
}

TEST_CASE("property: anderson never needs more sweeps than picard on affine maps") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = trial % 2 ? 2 : 1;
        // g(x) = M x + c with spectral radius < 1.
        std::vector<double> m(n * n), c(n);
        for (auto& v : m) v = u(rng) / static_cast<double>(n);
        for (auto& v : c) v = u(rng);
        auto g = [&](const std::vector<double>& x) {
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) {
                out[i] = c[i];
                for (std::size_t j = 0; j < n; ++j) out[i] += m[i * n + j] * x[j];
            }
            return out;
        };
        // Fixed point by long brute-force Picard.
        std::vector<double> fixed(n, 0.0);
        for (int k = 0; k < 5000; ++k) fixed = g(fixed);
        int plain = 0;
        {
            std::vector<double> x(n, 0.0);
            for (plain = 1; plain <= 2000; ++plain) {
                x = g(x);
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(x[i] - fixed[i]));
                if (d <= 1e-10) break;
            }
        }
        AndersonState st(n);
        const int accel = anderson_iterations(st, std::vector<double>(n, 0.0), g, fixed, 1e-10, 2000);
        CHECK(accel <= plain);
    }
}

TEST_CASE("window never exceeds depth and clear empties it") {
    AndersonState st(3);
    std::vector<double> x{1.0};
    for (int k = 0; k < 10; ++k) {
        x = st.update(x, std::vector<double>{std::cos(x[0])});
        CHECK(st.last_active() <= 3);
    }
    st.clear();
    CHECK(st.stored() == 0);
}

TEST_CASE("rank-deficient history falls back to picard") {
    AndersonState st(2);
    const std::vector<double> x{1.0, 1.0};
    const std::vector<double> gx{2.0, 2.0};
    (void)st.update(x, gx);
    // Same pair again: the difference columns vanish.
    const auto next = st.update(x, gx);
    CHECK(st.last_degenerate());
    CHECK(next == gx);
}
