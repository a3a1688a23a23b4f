#include "dde/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dde/types.hpp"

namespace dde {

Matrix Matrix::identity(std::size_t size) {
    Matrix m(size);
    for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
}

LUFactors lu_factorize(const Matrix& a) {
    const std::size_t n = a.n;
    LUFactors fac{a, std::vector<std::size_t>(n)};
    Matrix& lu = fac.lu;

    double amax = 0.0;
    for (double v : a.data) amax = std::max(amax, std::abs(v));
    const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * amax;
    if (amax == 0.0 && n > 0) throw DdeError(ErrorCode::SingularMatrix, "zero matrix");

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(lu(r, k)) > best) {
                best = std::abs(lu(r, k));
                p = r;
            }
        }
        if (!(best > tiny)) throw DdeError(ErrorCode::SingularMatrix, "pivot below threshold");
        fac.pivots[k] = p;
        if (p != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(p, c));
        }
        const double inv = 1.0 / lu(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = lu(r, k) * inv;
            lu(r, k) = m;
            if (m == 0.0) continue;
            for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= m * lu(k, c);
        }
    }
    return fac;
}

void lu_solve(const LUFactors& fac, std::span<double> b) {
    const std::size_t n = fac.lu.n;
    const Matrix& lu = fac.lu;
    for (std::size_t k = 0; k < n; ++k) {
        if (fac.pivots[k] != k) std::swap(b[k], b[fac.pivots[k]]);
    }
    for (std::size_t r = 1; r < n; ++r) {
        double acc = b[r];
        for (std::size_t c = 0; c < r; ++c) acc -= lu(r, c) * b[c];
        b[r] = acc;
    }
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= lu(r, c) * b[c];
        b[r] = acc / lu(r, r);
    }
}

std::vector<double> lu_solve(const LUFactors& fac, std::span<const double> b) {
    std::vector<double> x(b.begin(), b.end());
    lu_solve(fac, std::span<double>(x));
    return x;
}

void AndersonState::clear() {
    xs_.clear();
    gs_.clear();
    last_active_ = 0;
    last_degenerate_ = false;
}

namespace {

// Least squares min ||rhs - F gamma|| by modified Gram-Schmidt. Columns are
// dropped from the front (oldest) until R is well conditioned. Returns the
// index of the first retained column; gamma is sized to the retained count.
std::size_t mgs_least_squares(const std::vector<std::vector<double>>& cols, std::span<const double> rhs,
                              std::vector<double>& gamma) {
    const std::size_t n = rhs.size();
    for (std::size_t first = 0; first < cols.size(); ++first) {
        const std::size_t m = cols.size() - first;
        std::vector<std::vector<double>> q(m);
        std::vector<double> r(m * m, 0.0);
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
            q[j] = cols[first + j];
            double norm0 = 0.0;
            for (double v : q[j]) norm0 += v * v;
            norm0 = std::sqrt(norm0);
            for (std::size_t i = 0; i < j; ++i) {
                double dot = 0.0;
                for (std::size_t k = 0; k < n; ++k) dot += q[i][k] * q[j][k];
                r[i * m + j] = dot;
                for (std::size_t k = 0; k < n; ++k) q[j][k] -= dot * q[i][k];
            }
            double norm = 0.0;
            for (double v : q[j]) norm += v * v;
            norm = std::sqrt(norm);
            if (!(norm > 1e-10 * norm0) || norm == 0.0) {
                ok = false;
                break;
            }
            r[j * m + j] = norm;
            for (double& v : q[j]) v /= norm;
        }
        if (!ok) continue;
        std::vector<double> qtb(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < n; ++k) qtb[j] += q[j][k] * rhs[k];
        }
        gamma.assign(m, 0.0);
        for (std::size_t j = m; j-- > 0;) {
            double acc = qtb[j];
            for (std::size_t i = j + 1; i < m; ++i) acc -= r[j * m + i] * gamma[i];
            gamma[j] = acc / r[j * m + j];
        }
        return first;
    }
    gamma.clear();
    return cols.size();
}

}  // namespace

std::vector<double> AndersonState::update(std::span<const double> x, std::span<const double> gx) {
    const std::size_t n = x.size();
    std::vector<double> next(gx.begin(), gx.end());
    last_active_ = 0;
    last_degenerate_ = false;
    if (depth_ == 0) return next;

    std::vector<double> rk(n);
    for (std::size_t i = 0; i < n; ++i) rk[i] = gx[i] - x[i];

    if (!xs_.empty()) {
        // Consecutive differences over the stored window plus the current pair.
        const std::size_t m = xs_.size();
        std::vector<std::vector<double>> df(m, std::vector<double>(n));
        std::vector<std::vector<double>> dg(m, std::vector<double>(n));
        std::vector<std::vector<double>> dx(m, std::vector<double>(n));
        for (std::size_t j = 0; j < m; ++j) {
            const auto& x_a = xs_[j];
            const auto& g_a = gs_[j];
            const bool last = j + 1 == m;
            for (std::size_t i = 0; i < n; ++i) {
                const double x_b = last ? x[i] : xs_[j + 1][i];
                const double g_b = last ? gx[i] : gs_[j + 1][i];
                dx[j][i] = x_b - x_a[i];
                dg[j][i] = g_b - g_a[i];
                df[j][i] = (g_b - x_b) - (g_a[i] - x_a[i]);
            }
        }
        std::vector<double> gamma;
        const std::size_t first = mgs_least_squares(df, rk, gamma);
        last_active_ = gamma.size();
        if (gamma.empty()) {
            last_degenerate_ = true;
        } else if (damping_ == 1.0) {
            for (std::size_t j = 0; j < gamma.size(); ++j) {
                const auto& col = dg[first + j];
                for (std::size_t i = 0; i < n; ++i) next[i] -= gamma[j] * col[i];
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + damping_ * rk[i];
            for (std::size_t j = 0; j < gamma.size(); ++j) {
                const auto& cx = dx[first + j];
                const auto& cf = df[first + j];
                for (std::size_t i = 0; i < n; ++i) next[i] -= gamma[j] * (cx[i] + damping_ * cf[i]);
            }
        }
    } else if (damping_ != 1.0) {
        for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + damping_ * rk[i];
    }

    xs_.emplace_back(x.begin(), x.end());
    gs_.emplace_back(gx.begin(), gx.end());
    while (xs_.size() > depth_) {
        xs_.pop_front();
        gs_.pop_front();
    }
    return next;
}

}  // namespace dde
