#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hdl/grid.hpp"
#include "hdl/iterlog.hpp"
#include "hdl/riccati.hpp"

namespace hdl::singular_ode {

using iterlog::LogTowerParams;

// The channel sign c enters through m = 1 + c n:
//   s n' = n^2 + 2c s n + s n^2 + (2 + 2c n + n^2)(W_inf - 1)

// F_i = s f_i, as functions of x = X_1(s) (s may underflow to 0).
struct Coefficients {
    double F0 = 0.0, F1 = 0.0, F2 = 0.0;
};
Coefficients scaled_coefficients(double x, const LogTowerParams& p, Sign channel = Sign::Plus);

struct CoefficientFunctions {
    std::function<double(double)> f0, f1, f2;
};
CoefficientFunctions coefficient_functions(const LogTowerParams& p, Sign channel = Sign::Plus);

// Integral map Tw(x) = int_0^x (F0 + F1 w + F2 w^2) / xi^2 dxi on a log-spaced x-grid.
class PicardMap {
public:
    PicardMap(double delta, const LogTowerParams& p, Sign channel, double x_min, int nodes_per_decade);

    const std::vector<double>& x() const { return x_; }
    std::vector<double> apply(const std::vector<double>& w) const;
    // sup |u| |log s|
    double weighted_norm(const std::vector<double>& u) const;
    double integrand(std::size_t i, double w) const;

private:
    std::vector<double> x_, F0_, F1_, F2_, weight_;
    double du_ = 0.0;
};

struct SolveOptions {
    Sign channel = Sign::Plus;
    double x_min = 1e-12;
    int nodes_per_decade = 2000;
    int max_iterations = 200;
    int max_shrinks = 5;
    // initial iterate as a function of x = X_1(s); zero if empty
    std::function<double(double)> initial;
};

struct OdeSolution {
    double delta = 0.0;
    double C = 0.0;
    double tol = 0.0;
    Sign channel = Sign::Plus;
    LogTowerParams params;

    GridFunction samples;  // w on the representable part of (0, delta]
    std::vector<double> x, w, dwdx;
    int iterations = 0;
    int shrinks = 0;
    std::vector<double> distances;  // weighted distance between successive iterates
    double residual_sup = 0.0;
    double weighted_sup = 0.0;  // sup |w log s|
    double fixed_point_defect = 0.0;

    // continuation beyond delta, nodes in t = log s
    std::vector<double> cont_t, cont_n, cont_dn;
    std::optional<double> blowup;

    double reach() const;
    double w_at(double s) const;
    double n_at(double s) const;
    double dn_at(double s) const;
    double m_at(double s) const;
    double dm_at(double s) const;
    std::vector<double> contraction_ratios() const;
};

OdeSolution solve(double delta = 1e-2, double C = 0.5, double tol = 1e-10,
                  const LogTowerParams& p = {}, const SolveOptions& opt = {});

// Continue n past delta with RK4 in log s. Stops early on blow-up (n > 1e6).
OdeSolution extend(const OdeSolution& sol, double s_end, double dt = 1e-3);

// Pointwise singode residual with n' taken from the ODE in w.
// w_depth truncates W_inf in the residual's left side.
GridFunction residual(const OdeSolution& sol, std::optional<int> w_depth = std::nullopt);

} // namespace hdl::singular_ode
