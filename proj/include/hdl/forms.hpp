#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hdl/grid.hpp"
#include "hdl/potential.hpp"
#include "hdl/tridiag.hpp"

namespace hdl::forms {

using potential::MultiplierPair;
using potential::PotentialSpec;

// Eigenvalue n of sigma.L; n = -1 is not allowed.
class Channel {
public:
    explicit Channel(int n = 0);
    int n() const { return n_; }

private:
    int n_;
};

struct FormReport {
    double value = 0.0;
    std::optional<double> quotient;
    std::optional<double> discrete_min;
    std::size_t grid_size = 0;
    std::vector<std::pair<double, double>> refinement_history;  // (h, value)
    Channel channel{0};
};

// Radial forms are discretized in t = log r:
//   int p(r) v'^2 dr = int (p/r) v_t^2 dt   (midpoint, a = p/r)
//   int q(r) v^2 dr  = int (q r) v^2 dt     (trapezoid, b = q r)
using Weight = std::function<double(double)>;

double stiffness(const GridFunction& v, const Weight& a, int n = 0);
double mass(const GridFunction& v, const Weight& b);
// Dirichlet pencil on the interior nodes of r
tridiag::Pencil pencil(const std::vector<double>& r, const Weight& a, const Weight& b);

FormReport dirac_channel_form(const PotentialSpec& W, Channel ch, const GridFunction& v);
// int r^3/(r+W) (v' - n v/r)^2 dr; equal to dirac_channel_form for Dirichlet v
double channel_kinetic(const PotentialSpec& W, Channel ch, const GridFunction& v);

struct RpetitReport {
    std::vector<double> r, lower_margin, upper_margin;
    double min_margin = 0.0;
    bool passed = false;
};
RpetitReport rpetit_check(const PotentialSpec& W, double R, std::span<const double> grid, double tol = 1e-9);

FormReport verify_hardy(const GridFunction& v);
FormReport verify_R3(const GridFunction& v);
FormReport verify_R6(double nu, const GridFunction& v);

// W = 1 radial form of the Dirac-Hardy inequality and its scaled limit
double r1_form(const GridFunction& v);
double r2_form(const GridFunction& v);

struct R8Report {
    FormReport form;  // value = PP1 margin
    double kinetic_plus = 0.0, kinetic_minus = 0.0;
    double mass = 0.0, potential = 0.0;
    double surface = 0.0;   // -[m+] R^2 v+^2 + [m-] R^2 v-^2
    double pp1_rhs = 0.0;
    double pp1_margin = 0.0;
    double r8_margin = 0.0;  // K + M - P - C(R) sum R^2 v(R)^2
    double C_R = 0.0;
    double C_R_literal = 0.0;  // -max([m-], [m+])
    double scale = 0.0;
};

R8Report verify_R8(const PotentialSpec& W, const GridFunction& v_plus, const GridFunction& v_minus,
                   const MultiplierPair& m, Channel plus = Channel(0), Channel minus = Channel(-2));

// lambda^{-3/2} v(r / lambda), on the scaled grid
GridFunction dilate(const GridFunction& v, double lambda);

struct ScalingRow {
    double lambda = 0.0;
    double kinetic = 0.0, mass = 0.0, potential = 0.0;
    double gradient = 0.0;
    double grad_over_mass = 0.0;
    double margin = 0.0;  // kinetic + mass - potential
};
std::vector<ScalingRow> scaling_demo(const PotentialSpec& W, const GridFunction& v, std::span<const double> lambdas);

// Seeded Dirichlet bumps: squared-polynomial envelope times a Gaussian.
std::vector<GridFunction> bump_corpus(const std::vector<double>& grid, std::size_t count, std::uint64_t seed);

// Runs make(ppd) for ppd0, 2 ppd0, ... and returns the finest report with the history filled in.
FormReport refine(const std::function<FormReport(int)>& make, int ppd0, int levels);

} // namespace hdl::forms
