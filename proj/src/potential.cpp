#include "hdl/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdl/errors.hpp"
#include "hdl/roots.hpp"

namespace hdl::potential {

double w_pm(double m, double m_prime, double s, Sign sign) {
    if (!std::isfinite(m) || !std::isfinite(m_prime) || !std::isfinite(s))
        throw DomainError("w_pm: non-finite input");
    return (2.0 * m + sign_value(sign) * s * m_prime - s * m * m + s) / (1.0 + m * m);
}

double w_quarter(double s, Sign sign) {
    return w_pm(0.25 / s, -0.25 / (s * s), s, sign);
}

double w_bar_channel(double s, Sign sign, const LogTowerParams& p) {
    auto t = iterlog::tower_sums(s, p);
    double nb = 0.5 * t.sigma, E = t.sum_pi2 / 8.0;
    double c = sign_value(sign);
    // s nbar' = nbar^2 + 2 (W_inf - 1)
    double dnb = (nb * nb + 2.0 * E) / s;
    return w_pm(1.0 + c * nb, c * dnb, s, sign);
}

namespace {

double fd(const std::function<double(double)>& f, double s) {
    double h = s * 1e-6;
    return (f(s + h) - f(s - h)) / (2.0 * h);
}

double before(double s) { return std::nextafter(s, 0.0); }
double after(double s) { return std::nextafter(s, std::numeric_limits<double>::infinity()); }

} // namespace

double MultiplierPair::m(Sign sign, double s) const { return sign == Sign::Plus ? m_plus(s) : m_minus(s); }

double MultiplierPair::dm(Sign sign, double s) const {
    const auto& d = sign == Sign::Plus ? dm_plus : dm_minus;
    if (d) return d(s);
    return fd(sign == Sign::Plus ? m_plus : m_minus, s);
}

double MultiplierPair::m_left(Sign sign, double s) const { return m(sign, before(s)); }
double MultiplierPair::dm_left(Sign sign, double s) const { return dm(sign, before(s)); }
double MultiplierPair::m_right(Sign sign, double s) const { return m(sign, after(s)); }
double MultiplierPair::dm_right(Sign sign, double s) const { return dm(sign, after(s)); }

const std::vector<Jump>& MultiplierPair::jumps(Sign sign) const {
    return sign == Sign::Plus ? jumps_plus : jumps_minus;
}

double MultiplierPair::surface_constant() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& j : jumps_minus) worst = std::max(worst, j.size);
    for (const auto& j : jumps_plus) worst = std::max(worst, -j.size);
    if (!std::isfinite(worst)) return 0.0;
    return -worst;
}

MultiplierPair MultiplierPair::constant(double c_plus, double c_minus) {
    MultiplierPair mp;
    mp.m_plus = [c_plus](double) { return c_plus; };
    mp.m_minus = [c_minus](double) { return c_minus; };
    mp.dm_plus = [](double) { return 0.0; };
    mp.dm_minus = [](double) { return 0.0; };
    return mp;
}

struct PotentialSpec::State {
    Kind kind = Kind::Constant;
    std::string name;
    LogTowerParams params;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::vector<double> kinks;
    Tail tail;
    std::optional<BreakRadii> radii;
    std::shared_ptr<const MultiplierPair> multipliers;
    std::shared_ptr<const singular_ode::OdeSolution> ode_plus, ode_minus;
};

Kind PotentialSpec::kind() const { return st_->kind; }
const std::string& PotentialSpec::name() const { return st_->name; }
const LogTowerParams& PotentialSpec::params() const { return st_->params; }
const std::vector<double>& PotentialSpec::kinks() const { return st_->kinks; }
const Tail& PotentialSpec::tail() const { return st_->tail; }
std::optional<BreakRadii> PotentialSpec::radii() const { return st_->radii; }
std::shared_ptr<const MultiplierPair> PotentialSpec::multipliers() const { return st_->multipliers; }

double PotentialSpec::operator()(double s) const {
    if (!(s > 0.0)) throw DomainError("potential evaluated at s <= 0");
    return st_->eval(s);
}

double PotentialSpec::derivative(double s) const {
    if (st_->deriv) return st_->deriv(s);
    double h = s * 1e-6;
    if (st_->kind == Kind::WInfinityTrunc || st_->kind == Kind::WBar) {
        if (std::log(s + h) >= st_->params.a - 1.0) return ((*this)(s) - (*this)(s - h)) / h;
    }
    return ((*this)(s + h) - (*this)(s - h)) / (2.0 * h);
}

double eval_potential(const PotentialSpec& spec, double s) { return spec(s); }

PotentialSpec PotentialSpec::constant(double c) {
    auto st = std::make_shared<State>();
    st->kind = Kind::Constant;
    st->name = c == 1.0 ? "one" : "constant";
    st->eval = [c](double) { return c; };
    st->deriv = [](double) { return 0.0; };
    st->tail = Tail::constant(c);
    st->multipliers = std::make_shared<MultiplierPair>(MultiplierPair::constant(1.0, 1.0));
    if (c != 1.0) st->multipliers.reset();
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::w_infinity(const LogTowerParams& p, std::optional<int> depth) {
    p.validate();
    auto st = std::make_shared<State>();
    st->kind = Kind::WInfinityTrunc;
    st->name = "Winf";
    st->params = p;
    if (depth)
        st->eval = [p, k = *depth](double s) { return iterlog::w_infinity_truncated(s, k, p); };
    else
        st->eval = [p](double s) { return iterlog::w_infinity(s, p); };
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::w_bar(const LogTowerParams& p) {
    p.validate();
    auto st = std::make_shared<State>();
    st->kind = Kind::WBar;
    st->name = "Wbar";
    st->params = p;
    st->eval = [p](double s) {
        return std::min(w_bar_channel(s, Sign::Plus, p), w_bar_channel(s, Sign::Minus, p));
    };
    return PotentialSpec(st);
}

namespace {

double crossing(const std::function<double(double)>& f, double lo, double hi) {
    if (!scan_sign_change(f, lo, hi, 800)) throw BracketError("no crossing found");
    return bisect(f, lo, hi, 1e-12);
}

BreakRadii w1_radii(const LogTowerParams& p) {
    double hi = std::min(1.0, 0.999 * p.domain_end());
    double rp = crossing([&](double s) { return w_bar_channel(s, Sign::Plus, p) - 1.0; }, 1e-8, hi);
    double rm = rp;
    double lo = 1e-8, top = hi;
    // the minus channel stays above 1 for the usual a; fall back to R_+ then
    if (scan_sign_change([&](double s) { return w_bar_channel(s, Sign::Minus, p) - 1.0; }, lo, top, 800))
        rm = bisect([&](double s) { return w_bar_channel(s, Sign::Minus, p) - 1.0; }, lo, top, 1e-12);
    return {rp, rm};
}

BreakRadii w2_radii() {
    double tp = crossing([](double s) { return w_quarter(s, Sign::Plus) - 1.0; }, 0.01, 2.0);
    double tm = crossing([](double s) { return w_quarter(s, Sign::Minus) - 1.0; }, 0.01, 2.0);
    return {tp, tm};
}

BreakRadii w3_radii(const LogTowerParams& p) {
    double hi = std::min(10.0, 0.999 * p.domain_end());
    auto g = [&](Sign sg) {
        auto f = [&, sg](double s) { return iterlog::w_infinity(s, p) - w_quarter(s, sg); };
        double r = crossing(f, 1e-3, hi);
        if (!(iterlog::w_infinity(r, p) > 1.0)) throw BracketError("patching radius has W = 1");
        return r;
    };
    return {g(Sign::Plus), g(Sign::Minus)};
}

} // namespace

PotentialSpec PotentialSpec::w1(const LogTowerParams& p) {
    p.validate();
    auto st = std::make_shared<State>();
    st->kind = Kind::W1;
    st->name = "W1";
    st->params = p;
    auto r = w1_radii(p);
    st->radii = r;
    st->kinks = {r.plus};
    if (r.minus != r.plus) st->kinks.push_back(r.minus);
    double dom = p.domain_end();
    st->eval = [p, dom](double s) {
        if (s >= dom) return 1.0;
        double wb = std::min(w_bar_channel(s, Sign::Plus, p), w_bar_channel(s, Sign::Minus, p));
        return std::max(wb, 1.0);
    };
    st->tail = Tail::constant(1.0);

    MultiplierPair mp;
    auto nb = [p](double s) { return iterlog::nbar(s, p); };
    auto dnb = [p](double s) {
        auto t = iterlog::tower_sums(s, p);
        double n = 0.5 * t.sigma;
        return (n * n + t.sum_pi2 / 4.0) / s;
    };
    mp.m_plus = [nb, R = r.plus](double s) { return s < R ? 1.0 + nb(s) : 1.0; };
    mp.m_minus = [nb, R = r.minus](double s) { return s < R ? 1.0 - nb(s) : 1.0; };
    mp.dm_plus = [dnb, R = r.plus](double s) { return s < R ? dnb(s) : 0.0; };
    mp.dm_minus = [dnb, R = r.minus](double s) { return s < R ? -dnb(s) : 0.0; };
    mp.jumps_plus = {{r.plus, -nb(r.plus)}};
    mp.jumps_minus = {{r.minus, nb(r.minus)}};
    st->multipliers = std::make_shared<MultiplierPair>(std::move(mp));
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::w2() {
    auto st = std::make_shared<State>();
    st->kind = Kind::W2;
    st->name = "W2";
    auto r = w2_radii();
    st->radii = r;
    st->kinks = {r.plus, r.minus};
    st->eval = [](double s) {
        return std::max(1.0, std::min(w_quarter(s, Sign::Plus), w_quarter(s, Sign::Minus)));
    };
    st->tail = Tail::linear(1.0, 1.0 / 8.0);

    MultiplierPair mp;
    mp.m_plus = [R = r.plus](double s) { return s < R ? 1.0 : 0.25 / s; };
    mp.m_minus = [R = r.minus](double s) { return s < R ? 1.0 : 0.25 / s; };
    mp.dm_plus = [R = r.plus](double s) { return s < R ? 0.0 : -0.25 / (s * s); };
    mp.dm_minus = [R = r.minus](double s) { return s < R ? 0.0 : -0.25 / (s * s); };
    mp.jumps_plus = {{r.plus, 0.25 / r.plus - 1.0}};
    mp.jumps_minus = {{r.minus, 0.25 / r.minus - 1.0}};
    st->multipliers = std::make_shared<MultiplierPair>(std::move(mp));
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::w3(const LogTowerParams& p, std::shared_ptr<const singular_ode::OdeSolution> plus,
                                std::shared_ptr<const singular_ode::OdeSolution> minus) {
    p.validate();
    auto st = std::make_shared<State>();
    st->kind = Kind::W3;
    st->name = "W3";
    st->params = p;
    auto r = w3_radii(p);
    st->radii = r;
    st->kinks = {r.plus, r.minus};
    st->tail = Tail::linear(1.0, 1.0 / 8.0);
    st->ode_plus = plus;
    st->ode_minus = minus;
    if (!plus || !minus) {
        st->eval = [](double) -> double {
            throw MissingDependencyError("W3 needs the singular ODE solutions for both channels");
        };
        return PotentialSpec(st);
    }
    if (plus->channel != Sign::Plus || minus->channel != Sign::Minus)
        throw MissingDependencyError("W3: ODE solutions attached to the wrong channels");
    if (plus->reach() < r.plus * (1 - 1e-12) || minus->reach() < r.minus * (1 - 1e-12))
        throw MissingDependencyError("W3: ODE solution does not reach the patching radius");

    auto channel = [p](double s, Sign sg, double R) {
        return s <= R ? iterlog::w_infinity(s, p) : w_quarter(s, sg);
    };
    st->eval = [channel, r](double s) {
        return std::min(channel(s, Sign::Plus, r.plus), channel(s, Sign::Minus, r.minus));
    };

    MultiplierPair mp;
    mp.m_plus = [plus, R = r.plus](double s) { return s <= R ? plus->m_at(s) : 0.25 / s; };
    mp.m_minus = [minus, R = r.minus](double s) { return s <= R ? minus->m_at(s) : 0.25 / s; };
    mp.dm_plus = [plus, R = r.plus](double s) { return s <= R ? plus->dm_at(s) : -0.25 / (s * s); };
    mp.dm_minus = [minus, R = r.minus](double s) { return s <= R ? minus->dm_at(s) : -0.25 / (s * s); };
    // the ODE branch is closed at R, so R itself is the left limit here
    mp.jumps_plus = {{r.plus, 0.25 / r.plus - plus->m_at(r.plus)}};
    mp.jumps_minus = {{r.minus, 0.25 / r.minus - minus->m_at(r.minus)}};
    st->multipliers = std::make_shared<MultiplierPair>(std::move(mp));
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::make_w3(const LogTowerParams& p) {
    auto r = w3_radii(p);
    singular_ode::SolveOptions op;
    op.channel = Sign::Plus;
    auto sp = singular_ode::extend(singular_ode::solve(1e-2, 0.5, 1e-10, p, op), r.plus);
    op.channel = Sign::Minus;
    auto sm = singular_ode::extend(singular_ode::solve(1e-2, 0.5, 1e-10, p, op), r.minus);
    if (sp.blowup || sm.blowup) throw MissingDependencyError("W3: ODE solution blows up before R");
    return w3(p, std::make_shared<const singular_ode::OdeSolution>(std::move(sp)),
              std::make_shared<const singular_ode::OdeSolution>(std::move(sm)));
}

PotentialSpec PotentialSpec::from_multipliers(MultiplierPair pair, Tail tail) {
    auto st = std::make_shared<State>();
    st->kind = Kind::FromMultipliers;
    st->name = "multipliers";
    auto mp = std::make_shared<const MultiplierPair>(std::move(pair));
    st->multipliers = mp;
    st->eval = [mp](double s) {
        return std::min(w_pm(mp->m(Sign::Plus, s), mp->dm(Sign::Plus, s), s, Sign::Plus),
                        w_pm(mp->m(Sign::Minus, s), mp->dm(Sign::Minus, s), s, Sign::Minus));
    };
    for (const auto& j : mp->jumps_plus) st->kinks.push_back(j.radius);
    for (const auto& j : mp->jumps_minus) st->kinks.push_back(j.radius);
    st->tail = tail;
    return PotentialSpec(st);
}

PotentialSpec PotentialSpec::custom(std::string name, std::function<double(double)> f, Tail tail,
                                    std::vector<double> kinks) {
    auto st = std::make_shared<State>();
    st->kind = Kind::Custom;
    st->name = std::move(name);
    st->eval = std::move(f);
    st->tail = tail;
    st->kinks = std::move(kinks);
    return PotentialSpec(st);
}

double find_T() {
    auto f = [](double s) {
        return std::min(w_quarter(s, Sign::Plus), w_quarter(s, Sign::Minus)) - 1.0;
    };
    double lo = 0.1, hi = 2.0;
    // smallest T with the min above 1 from T on: scan down from the top
    if (!(f(hi) > 0.0)) throw BracketError("find_T: no sign change in (0.1, 2)");
    const int n = 2000;
    double step = (hi - lo) / n;
    double b = hi;
    for (int i = 1; i <= n; ++i) {
        double a = hi - i * step;
        if (f(a) < 0.0) return bisect(f, a, b, 1e-13);
        b = a;
    }
    throw BracketError("find_T: no sign change in (0.1, 2)");
}

double threshold_closed_form() {
    double r = std::sqrt(417.0);
    return (std::cbrt(4096.0 - 192.0 * r) + 4.0 * (4.0 + std::cbrt(64.0 + 3.0 * r))) / 48.0;
}

BreakRadii break_radii(const PotentialSpec& spec) {
    switch (spec.kind()) {
    case Kind::W1: return w1_radii(spec.params());
    case Kind::W2: return w2_radii();
    case Kind::W3: return w3_radii(spec.params());
    default: throw DomainError("break_radii: spec has no break radii");
    }
}

MultiplierPair multipliers(const PotentialSpec& spec) {
    auto mp = spec.multipliers();
    if (!mp) throw MissingDependencyError("spec carries no multiplier pair");
    return *mp;
}

AdmissibilityReport admissible(const MultiplierPair& pair, const PotentialSpec& W, std::span<const double> grid,
                               double tol) {
    AdmissibilityReport rep;
    rep.tol = tol;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = grid[i];
        if (!(s > 0.0) || (i > 0 && !(s > grid[i - 1]))) throw GridError("admissible: grid must be increasing and positive");
        double w = W(s);
        double cp = w_pm(pair.m(Sign::Plus, s), pair.dm(Sign::Plus, s), s, Sign::Plus);
        double cm = w_pm(pair.m(Sign::Minus, s), pair.dm(Sign::Minus, s), s, Sign::Minus);
        if (!std::isfinite(w) || !std::isfinite(cp) || !std::isfinite(cm))
            throw DomainError("admissible: non-finite value at s = " + std::to_string(s));
        rep.s.push_back(s);
        rep.W.push_back(w);
        rep.channel_plus.push_back(cp);
        rep.channel_minus.push_back(cm);
        rep.margin_plus.push_back(cp - w);
        rep.margin_minus.push_back(cm - w);
        rep.min_margin = std::min({rep.min_margin, cp - w, cm - w});
    }
    rep.passed = rep.min_margin >= -tol;
    return rep;
}

riccati::Trace blowup_demo(const PotentialSpec& W, double s0, double m0, double s_max, double cap) {
    riccati::Options opt;
    opt.cap = cap;
    opt.breakpoints = W.kinks();
    return riccati::integrate([W](double s) { return W(s); }, Sign::Plus, s0, m0, s_max, opt);
}

} // namespace hdl::potential
