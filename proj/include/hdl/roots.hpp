#pragma once

#include <cmath>

#include "hdl/errors.hpp"

namespace hdl {

// Bisection on a sign change in [lo, hi]; stops at |hi - lo| <= tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 400) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) throw BracketError("no sign change in bracket");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// First sign change of f on a geometric scan of [lo, hi]; returns the
// bracketing pair through lo/hi.
template <class F>
bool scan_sign_change(F&& f, double& lo, double& hi, int n = 400) {
    double ratio = std::pow(hi / lo, 1.0 / n);
    double a = lo, fa = f(a);
    for (int i = 1; i <= n; ++i) {
        double b = (i == n) ? hi : a * ratio;
        double fb = f(b);
        if (std::signbit(fa) != std::signbit(fb) || fb == 0.0) {
            lo = a;
            hi = b;
            return true;
        }
        a = b;
        fa = fb;
    }
    return false;
}

} // namespace hdl
