#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hdl {

// Sampled radial function. dirichlet => v vanishes at both ends.
struct GridFunction {
    std::vector<double> r;
    std::vector<double> v;
    bool dirichlet = false;

    std::size_t size() const { return r.size(); }
    void validate() const;
};

std::vector<double> log_grid(double lo, double hi, int points_per_decade);
std::vector<double> log_grid_n(double lo, double hi, std::size_t n);
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

// Merge extra nodes into a sorted grid, dropping near-duplicates.
std::vector<double> with_nodes(std::vector<double> grid, std::span<const double> extra);

double trapezoid(std::span<const double> x, std::span<const double> y);

template <class F>
GridFunction sample(const std::vector<double>& r, F&& f, bool dirichlet = false) {
    GridFunction g;
    g.r = r;
    g.v.reserve(r.size());
    for (double x : r) g.v.push_back(f(x));
    g.dirichlet = dirichlet;
    return g;
}

} // namespace hdl
