#include "hdl/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdl/errors.hpp"

namespace hdl::tridiag {

Pencil scaled(const Pencil& p) {
    std::size_t n = p.diag.size();
    if (n == 0 || p.mass.size() != n || p.off.size() + 1 != n) throw GridError("malformed pencil");
    Pencil c;
    c.diag.resize(n);
    c.off.resize(n - 1);
    std::vector<double> is(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p.mass[i] > 0.0)) throw GridError("singular mass matrix");
        is[i] = 1.0 / std::sqrt(p.mass[i]);
    }
    for (std::size_t i = 0; i < n; ++i) c.diag[i] = p.diag[i] * is[i] * is[i];
    for (std::size_t i = 0; i + 1 < n; ++i) c.off[i] = p.off[i] * is[i] * is[i + 1];
    return c;
}

std::size_t sturm_count(const Pencil& c, double lambda) {
    std::size_t count = 0;
    double q = c.diag[0] - lambda;
    const double tiny = std::numeric_limits<double>::min();
    for (std::size_t i = 0;; ++i) {
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
        if (i + 1 == c.diag.size()) break;
        q = (c.diag[i + 1] - lambda) - c.off[i] * c.off[i] / q;
    }
    return count;
}

double smallest_eigenvalue_bisection(const Pencil& p, double rel_tol) {
    Pencil c = scaled(p);
    std::size_t n = c.diag.size();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = (i > 0 ? std::abs(c.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(c.off[i]) : 0.0);
        lo = std::min(lo, c.diag[i] - r);
        hi = std::max(hi, c.diag[i] + r);
    }
    while (hi - lo > rel_tol * std::max(std::abs(lo), std::abs(hi))) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (sturm_count(c, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// solve (C - shift) x = b, C symmetric tridiagonal
std::vector<double> thomas(const Pencil& c, double shift, const std::vector<double>& b) {
    std::size_t n = c.diag.size();
    std::vector<double> cp(n), dp(n);
    double den = c.diag[0] - shift;
    if (den == 0.0) throw GridError("singular matrix in Thomas solve");
    cp[0] = n > 1 ? c.off[0] / den : 0.0;
    dp[0] = b[0] / den;
    for (std::size_t i = 1; i < n; ++i) {
        den = (c.diag[i] - shift) - c.off[i - 1] * cp[i - 1];
        if (den == 0.0) throw GridError("singular matrix in Thomas solve");
        cp[i] = i + 1 < n ? c.off[i] / den : 0.0;
        dp[i] = (b[i] - c.off[i - 1] * dp[i - 1]) / den;
    }
    std::vector<double> x(n);
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
}

double rayleigh(const Pencil& c, const std::vector<double>& x) {
    double num = 0.0, den = 0.0;
    std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double ax = c.diag[i] * x[i];
        if (i > 0) ax += c.off[i - 1] * x[i - 1];
        if (i + 1 < n) ax += c.off[i] * x[i + 1];
        num += x[i] * ax;
        den += x[i] * x[i];
    }
    return num / den;
}

void normalize(std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = 1.0 / std::sqrt(s);
    for (double& v : x) v *= s;
}

} // namespace

EigenResult inverse_iteration(const Pencil& p, double shift, double tol, int max_iter, std::vector<double> start) {
    Pencil c = scaled(p);
    std::size_t n = c.diag.size();
    bool given = !start.empty();
    if (given && start.size() != n) throw GridError("start vector has the wrong size");
    std::vector<double> x = given ? std::move(start) : std::vector<double>(n, 1.0);
    if (given)
        for (std::size_t i = 0; i < n; ++i) x[i] *= std::sqrt(p.mass[i]);
    normalize(x);
    EigenResult res;
    double prev = rayleigh(c, x);
    for (int it = 1; it <= max_iter; ++it) {
        x = thomas(c, shift, x);
        normalize(x);
        double rq = rayleigh(c, x);
        res.iterations = it;
        if (std::abs(rq - prev) <= tol * std::abs(rq)) {
            res.converged = true;
            prev = rq;
            break;
        }
        prev = rq;
    }
    res.value = prev;
    res.vector.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.vector[i] = x[i] / std::sqrt(p.mass[i]);
    return res;
}

EigenResult smallest_eigenpair(const Pencil& p, double tol) {
    double lam = smallest_eigenvalue_bisection(p);
    double shift = lam - 1e-9 * std::max(std::abs(lam), 1e-300);
    auto res = inverse_iteration(p, shift, tol, 50);
    return res;
}

} // namespace hdl::tridiag
