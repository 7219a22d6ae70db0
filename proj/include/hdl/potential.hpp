#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdl/iterlog.hpp"
#include "hdl/riccati.hpp"
#include "hdl/singular_ode.hpp"

namespace hdl::potential {

using iterlog::LogTowerParams;

// W^{+-,m} = (2m +- s m' - s m^2 + s) / (1 + m^2)
double w_pm(double m, double m_prime, double s, Sign sign);

// [m]_R = m(R+) - m(R-)
struct Jump {
    double radius = 0.0;
    double size = 0.0;
};

struct MultiplierPair {
    std::function<double(double)> m_plus, m_minus;
    std::function<double(double)> dm_plus, dm_minus;  // finite differences if empty
    std::vector<Jump> jumps_plus, jumps_minus;

    double m(Sign sign, double s) const;
    double dm(Sign sign, double s) const;
    double m_left(Sign sign, double s) const;
    double dm_left(Sign sign, double s) const;
    double m_right(Sign sign, double s) const;
    double dm_right(Sign sign, double s) const;
    const std::vector<Jump>& jumps(Sign sign) const;
    // C(R) = -max([m_-]_R, -[m_+]_R)
    double surface_constant() const;

    static MultiplierPair constant(double c_plus, double c_minus);
};

enum class Kind { Constant, WInfinityTrunc, WBar, W1, W2, W3, FromMultipliers, Custom };

// Declared large-s behaviour: W ~ value (Constant) or W ~ slope*s + coefficient/s (Linear).
struct Tail {
    enum class Type { None, Constant, Linear } type = Type::None;
    double value = 0.0;
    double slope = 1.0;
    double coefficient = 0.0;

    static Tail constant(double c) { return {Type::Constant, c, 0.0, 0.0}; }
    static Tail linear(double slope, double coefficient) { return {Type::Linear, 0.0, slope, coefficient}; }
};

struct BreakRadii {
    double plus = 0.0;
    double minus = 0.0;
};

class PotentialSpec {
public:
    static PotentialSpec constant(double c = 1.0);
    static PotentialSpec w_infinity(const LogTowerParams& p = {}, std::optional<int> depth = std::nullopt);
    static PotentialSpec w_bar(const LogTowerParams& p = {});
    static PotentialSpec w1(const LogTowerParams& p = {});
    static PotentialSpec w2();
    // ODE solutions must reach the patching radii; null solutions leave the spec
    // constructible but unevaluable.
    static PotentialSpec w3(const LogTowerParams& p, std::shared_ptr<const singular_ode::OdeSolution> plus,
                            std::shared_ptr<const singular_ode::OdeSolution> minus);
    static PotentialSpec make_w3(const LogTowerParams& p = {});
    static PotentialSpec from_multipliers(MultiplierPair pair, Tail tail = {});
    static PotentialSpec custom(std::string name, std::function<double(double)> f, Tail tail = {},
                                std::vector<double> kinks = {});

    Kind kind() const;
    const std::string& name() const;
    const LogTowerParams& params() const;
    double operator()(double s) const;
    double derivative(double s) const;
    const std::vector<double>& kinks() const;
    const Tail& tail() const;
    std::optional<BreakRadii> radii() const;
    std::shared_ptr<const MultiplierPair> multipliers() const;

private:
    struct State;
    std::shared_ptr<const State> st_;
    explicit PotentialSpec(std::shared_ptr<const State> st) : st_(std::move(st)) {}
};

double eval_potential(const PotentialSpec& spec, double s);

// W^{+-,1/(4s)}: the large-s channel potentials
double w_quarter(double s, Sign sign);
// W-bar channel potentials with m = 1 +- nbar
double w_bar_channel(double s, Sign sign, const LogTowerParams& p);

double find_T();
double threshold_closed_form();

BreakRadii break_radii(const PotentialSpec& spec);
MultiplierPair multipliers(const PotentialSpec& spec);

struct AdmissibilityReport {
    std::vector<double> s, W, channel_plus, channel_minus, margin_plus, margin_minus;
    double min_margin = 0.0;
    double tol = 0.0;
    bool passed = false;
};

AdmissibilityReport admissible(const MultiplierPair& pair, const PotentialSpec& W, std::span<const double> grid,
                               double tol = 1e-9);

riccati::Trace blowup_demo(const PotentialSpec& W, double s0, double m0, double s_max = 100.0,
                           double cap = 1e6);

} // namespace hdl::potential
