#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace hdl {

enum class Sign { Plus = 1, Minus = -1 };

inline double sign_value(Sign s) { return s == Sign::Plus ? 1.0 : -1.0; }

namespace riccati {

// Equality case of the admissibility condition for one channel:
//   +:  s m' = s m^2 - s - 2m + (1 + m^2) W
//   -:  s m' = 2m - s m^2 + s - (1 + m^2) W
double rhs(Sign sign, double s, double m, double W);

struct Options {
    double tol = 1e-10;
    double max_dt = 0.01;  // in log s
    double cap = 1e6;
    std::vector<double> breakpoints;  // s values never stepped across
};

struct Trace {
    std::vector<double> s, m;
    std::optional<double> escape_radius;
    bool blew_up = false;
    double max_m = 0.0;
};

// Adaptive RK4 with step doubling in t = log s, from s0 to s_end.
Trace integrate(const std::function<double(double)>& W, Sign sign, double s0, double m0,
                double s_end, const Options& opt = {});

} // namespace riccati
} // namespace hdl
