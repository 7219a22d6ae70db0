#pragma once

#include <functional>
#include <vector>

#include "hdl/iterlog.hpp"
#include "hdl/potential.hpp"

namespace hdl::transform {

using potential::PotentialSpec;

// Smooth test function with analytic derivative, supported in [lo, hi].
struct TestFunction {
    std::function<double(double)> u, du;
    double lo = 0.0, hi = 1.0;
};

// A exp(-1/(1 - xi^2)), xi mapping [lo, hi] onto [-1, 1]
TestFunction smooth_bump(double lo, double hi, double amplitude = 1.0);

// int_a^b W(s) s^-3 ds, split at kinks and decades
double integrate_w_s3(const PotentialSpec& W, double a, double b);
// int_r^inf W(s) s^-3 ds with the declared tail past 1e3
double tail_integral(const PotentialSpec& W, double r);

double y_of_r(const PotentialSpec& W, double r);
// r(y) by bracketing and bisection, for any y in the range of y_of_r
double r_of_y(const PotentialSpec& W, double y);
double v_of_y(const PotentialSpec& W, double y);
// V from W/(r+W) (int_1^inf (t r + W(t r)) t^-3 dt)^2, evaluated at r
double v_second_form(const PotentialSpec& W, double r);

class VariableMap {
public:
    VariableMap(PotentialSpec W, std::vector<double> r_grid);

    const PotentialSpec& potential() const { return W_; }
    const std::vector<double>& r_grid() const { return r_; }
    const std::vector<double>& y_values() const { return y_; }

    double y(double r) const;
    double r_of_y(double y) const;
    double V(double y) const;
    double V_at_r(double r) const;

private:
    PotentialSpec W_;
    std::vector<double> r_, y_, J_;
    double J_at(double r, std::size_t& idx) const;
};

struct EquivalenceReport {
    double lhs23 = 0.0, rhs23 = 0.0, lhsAA2 = 0.0, rhsAA2 = 0.0;
    double rel_mismatch = 0.0;
    std::size_t nodes = 0;
};

EquivalenceReport equivalence_check(const PotentialSpec& W, const TestFunction& u, std::size_t nodes = 2001);

// Grid-function form: u sampled on a uniform r-grid, derivative by centered differences.
EquivalenceReport equivalence_check(const PotentialSpec& W, const GridFunction& u);

struct TelescopeReport {
    double lhs = 0.0;
    double hardy_part = 0.0;
    double remainder = 0.0;
    double rhs = 0.0;
    double rel_mismatch = 0.0;
};

TelescopeReport telescope(const TestFunction& u, int k, double R, const iterlog::LogTowerParams& p,
                          std::size_t nodes = 20001);

// g_1(tau_1), ..., g_{k+1}(tau_{k+1}) at radius r, via g_j(tau) = sqrt(tau) g_{j+1}(a + log tau).
std::vector<double> g_chain(const TestFunction& u, int k, double r, const iterlog::LogTowerParams& p);

// inf of int y^2 q'^2 / int V_k q^2 over q supported in log y in [t_lo, t_hi],
// V_k = (1 + sum_{j<=k} pi_j^2)/4
double truncated_optimality_quotient(int k, double t_lo, double t_hi, const iterlog::LogTowerParams& p,
                                     std::size_t nodes = 4000);

} // namespace hdl::transform
