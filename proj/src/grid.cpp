#include "hdl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hdl/errors.hpp"

namespace hdl {

void GridFunction::validate() const {
    if (r.size() != v.size()) throw GridError("grid/value length mismatch");
    if (r.size() < 2) throw GridError("grid needs at least two nodes");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!(r[i + 1] > r[i])) throw GridError("grid not strictly increasing");
    if (!(r.front() > 0.0)) throw GridError("grid must be positive");
    if (dirichlet && (v.front() != 0.0 || v.back() != 0.0))
        throw GridError("dirichlet grid function nonzero at an endpoint");
}

std::vector<double> log_grid_n(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw GridError("bad log grid");
    std::vector<double> g(n);
    double l0 = std::log(lo), l1 = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> log_grid(double lo, double hi, int ppd) {
    if (ppd < 1) throw GridError("points per decade must be positive");
    if (!(lo > 0.0) || !(hi > lo)) throw GridError("bad log grid");
    double decades = std::log10(hi / lo);
    auto n = std::size_t(std::ceil(decades * ppd)) + 1;
    return log_grid_n(lo, hi, std::max<std::size_t>(n, 2));
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || n < 2) throw GridError("bad uniform grid");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    g.back() = hi;
    return g;
}

std::vector<double> with_nodes(std::vector<double> grid, std::span<const double> extra) {
    for (double e : extra) {
        if (e <= grid.front() || e >= grid.back()) continue;
        auto it = std::lower_bound(grid.begin(), grid.end(), e);
        // snap onto an existing node if it is within rounding distance
        double scale = std::abs(e) * 1e-12;
        if (it != grid.end() && std::abs(*it - e) <= scale) { *it = e; continue; }
        if (it != grid.begin() && std::abs(*(it - 1) - e) <= scale) { *(it - 1) = e; continue; }
        grid.insert(it, e);
    }
    return grid;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

} // namespace hdl
