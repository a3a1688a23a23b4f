#pragma once

// Test-only reference computations, kept independent of the library code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

// Exact rational with 128-bit parts; enough for the first few
// method-of-steps pieces of x'(t) = -x(t - 1).
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    static __int128 gcd(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            const __int128 r = a % b;
            a = b;
            b = r;
        }
        return a;
    }

    Rational() = default;
    Rational(__int128 n, __int128 d = 1) : num(n), den(d) {
        if (den == 0) throw std::domain_error("zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const __int128 g = gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Rational operator+(Rational a, Rational b) {
        const __int128 g = gcd(a.den, b.den);
        return {a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den};
    }
    friend Rational operator-(Rational a) { return {-a.num, a.den}; }
    friend Rational operator-(Rational a, Rational b) { return a + (-b); }
    friend Rational operator*(Rational a, Rational b) {
        const __int128 g1 = gcd(a.num, b.den);
        const __int128 g2 = gcd(b.num, a.den);
        const __int128 n1 = g1 ? a.num / g1 : a.num;
        const __int128 d2 = g1 ? b.den / g1 : b.den;
        const __int128 n2 = g2 ? b.num / g2 : b.num;
        const __int128 d1 = g2 ? a.den / g2 : a.den;
        return {n1 * n2, d1 * d2};
    }
    [[nodiscard]] long double value() const {
        return static_cast<long double>(num) / static_cast<long double>(den);
    }
};

// Polynomial in global t, coefficient j multiplies t^j.
using Poly = std::vector<Rational>;

inline Rational poly_at(const Poly& p, Rational t) {
    Rational acc;
    for (std::size_t j = p.size(); j-- > 0;) acc = acc * t + p[j];
    return acc;
}

inline long double poly_at(const Poly& p, long double t) {
    long double acc = 0;
    for (std::size_t j = p.size(); j-- > 0;) acc = acc * t + p[j].value();
    return acc;
}

// p(t - 1) by binomial expansion.
inline Poly shift_by_one(const Poly& p) {
    Poly out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        __int128 binom = 1;
        for (std::size_t m = 0; m <= j; ++m) {
            // term binom(j, m) * t^m * (-1)^(j-m)
            const __int128 sign = ((j - m) % 2 == 0) ? 1 : -1;
            out[m] = out[m] + p[j] * Rational(sign * binom);
            binom = binom * static_cast<__int128>(j - m) / static_cast<__int128>(m + 1);
        }
    }
    return out;
}

// Hutchinson's equation x'(t) = -x(t-1), x = 1 on t <= 0, solved piece by
// piece with exact arithmetic: x_k(t) = x_{k-1}(k) - int_k^t x_{k-1}(s-1) ds.
class HutchinsonRational {
  public:
    explicit HutchinsonRational(int pieces) {
        Poly prev = {Rational(1)};
        for (int k = 0; k < pieces; ++k) {
            const Poly delayed = shift_by_one(prev);
            Poly anti(delayed.size() + 1);
            for (std::size_t j = 0; j < delayed.size(); ++j) {
                anti[j + 1] = -delayed[j] * Rational(1, static_cast<__int128>(j + 1));
            }
            const Rational start = poly_at(prev, Rational(k));
            anti[0] = start - poly_at(anti, Rational(k));
            pieces_.push_back(anti);
            prev = anti;
        }
    }

    [[nodiscard]] Rational exact(int t) const {
        if (t <= 0) return Rational(1);
        return poly_at(pieces_.at(static_cast<std::size_t>(t - 1)), Rational(t));
    }

    [[nodiscard]] double operator()(double t) const {
        if (t <= 0.0) return 1.0;
        auto k = static_cast<std::size_t>(std::ceil(t)) - 1;
        return static_cast<double>(poly_at(pieces_.at(k), static_cast<long double>(t)));
    }

  private:
    std::vector<Poly> pieces_;
};

// Sign scan on a fine grid followed by plain bisection.
inline double grid_bisect(const std::function<double(double)>& g, double a, double b, int grid = 100000) {
    double prev_t = a;
    double prev_g = g(a);
    for (int i = 1; i <= grid; ++i) {
        const double t = a + (b - a) * i / grid;
        const double gt = g(t);
        if ((prev_g < 0) != (gt < 0)) {
            double lo = prev_t;
            double hi = t;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) < 0) == (prev_g < 0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_t = t;
        prev_g = gt;
    }
    throw std::runtime_error("no sign change");
}

// Plain Picard iteration; returns the number of sweeps to reach tol.
inline int picard_iterations(const std::function<double(double)>& g, double x, double fixed, double tol,
                             int cap = 10000) {
    for (int k = 1; k <= cap; ++k) {
        x = g(x);
        if (std::abs(x - fixed) <= tol) return k;
    }
    return cap + 1;
}

// One classic RK4 step written out directly.
inline double rk4_scalar(const std::function<double(double, double)>& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + h / 2, y + h / 2 * k1);
    const double k3 = f(t + h / 2, y + h / 2 * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace oracle
