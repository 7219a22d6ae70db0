#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hdl/potential.hpp"
#include "hdl/singular_ode.hpp"

namespace hdl::counterexample {

using potential::PotentialSpec;

// 64 t^3 (1-t)^3 on (0, 1), peak value 1 at t = 1/2
double bump_profile(double t);

// s_n = s0 ratio^n, eps_n = eps0 eps_ratio^n, bumps on (s_n, s_n + eps_n)
struct BumpFamily {
    double s0 = 1.0;
    double ratio = 0.5;
    double eps0 = 1.0 / 16.0;
    double eps_ratio = 0.25;
    double height = 0.5;
    std::function<double(double)> profile = bump_profile;

    double s(int n) const;
    double eps(int n) const;
    double region_end() const { return s0 + eps0; }
    void validate() const;
    // bump edges above s_min, ascending
    std::vector<double> edges(double s_min) const;
    // index of the bump containing s, if any
    std::optional<int> active(double s) const;
};

BumpFamily standard_family(double height);

double bumped_potential(const PotentialSpec& base, const BumpFamily& bumps, double s);
PotentialSpec bumped(const PotentialSpec& base, const BumpFamily& bumps, double s_min = 1e-12);

struct Trial {
    int trial = 0;
    double s_start = 0.0;
    std::optional<double> blowup_radius;
    double max_m = 0.0;
    double log_bound = 0.0;  // sup |(m - 1) log s| over s < 1 along the trajectory
    bool blew_up_in_region = false;
};

struct Report {
    std::vector<Trial> trials;
    double region_end = 0.0;
    bool all_blow_up = false;
};

// Riccati equality integrated from m(s_start) = 1 + c n(s_start), n from the W_inf
// singular ODE, for s_start = 1e-2, 1e-3, ...
Report no_continuous_multiplier(const BumpFamily& bumps, int trials, const iterlog::LogTowerParams& p = {},
                                Sign channel = Sign::Plus,
                                std::shared_ptr<const singular_ode::OdeSolution> ode = nullptr);

} // namespace hdl::counterexample
