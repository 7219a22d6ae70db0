#include "hdl/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include "hdl/errors.hpp"
#include "hdl/riccati.hpp"

namespace hdl::counterexample {

double bump_profile(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double u = t * (1.0 - t);
    return 64.0 * u * u * u;
}

double BumpFamily::s(int n) const { return s0 * std::pow(ratio, n); }
double BumpFamily::eps(int n) const { return eps0 * std::pow(eps_ratio, n); }

void BumpFamily::validate() const {
    if (!(s0 > 0.0) || !(ratio > 0.0 && ratio < 1.0)) throw DomainError("bump centres must decrease to 0");
    if (!(eps0 > 0.0) || !(eps_ratio > 0.0 && eps_ratio < 1.0)) throw DomainError("bump widths must be summable");
    if (!(height >= 0.0)) throw DomainError("bump height must be nonnegative");
    if (!profile) throw DomainError("bump profile missing");
    // eps_{n+1} < s_n - s_{n+1}; both sides are geometric, so n = 0 and the ratio settle it
    for (int n = 0; n < 64; ++n)
        if (!(eps(n + 1) < s(n) - s(n + 1))) throw DomainError("bumps overlap");
    if (eps_ratio > ratio && !(eps(64) < s(63) - s(64))) throw DomainError("bumps overlap asymptotically");
}

std::vector<double> BumpFamily::edges(double s_min) const {
    std::vector<double> e;
    for (int n = 0;; ++n) {
        double a = s(n);
        if (a + eps(n) < s_min) break;
        e.push_back(a);
        e.push_back(a + eps(n));
        if (n > 2000) break;
    }
    std::sort(e.begin(), e.end());
    return e;
}

std::optional<int> BumpFamily::active(double x) const {
    if (x <= 0.0) return std::nullopt;
    double est = std::log(x / s0) / std::log(ratio);
    int n0 = std::max(0, int(std::floor(est)) - 1);
    for (int n = n0; n <= n0 + 3; ++n) {
        double a = s(n);
        if (x > a && x < a + eps(n)) return n;
    }
    return std::nullopt;
}

BumpFamily standard_family(double height) {
    BumpFamily b;
    b.height = height;
    return b;
}

double bumped_potential(const PotentialSpec& base, const BumpFamily& bumps, double x) {
    double w = base(x);
    if (auto n = bumps.active(x)) w += bumps.height * bumps.profile((x - bumps.s(*n)) / bumps.eps(*n));
    return w;
}

PotentialSpec bumped(const PotentialSpec& base, const BumpFamily& bumps, double s_min) {
    bumps.validate();
    auto k = bumps.edges(s_min);
    for (double x : base.kinks()) k.push_back(x);
    std::sort(k.begin(), k.end());
    return PotentialSpec::custom(
        "bumped", [base, bumps](double x) { return bumped_potential(base, bumps, x); }, base.tail(), k);
}

Report no_continuous_multiplier(const BumpFamily& bumps, int trials, const iterlog::LogTowerParams& p, Sign channel,
                                std::shared_ptr<const singular_ode::OdeSolution> ode) {
    if (trials < 1) throw DomainError("need at least one trial");
    bumps.validate();
    if (!ode) {
        singular_ode::SolveOptions op;
        op.channel = channel;
        ode = std::make_shared<const singular_ode::OdeSolution>(singular_ode::solve(1e-2, 0.5, 1e-10, p, op));
    }
    if (ode->channel != channel) throw MissingDependencyError("ODE solution attached to the other channel");

    auto base = PotentialSpec::w_infinity(p);
    auto W = bumped(base, bumps, 1e-12);
    Report rep;
    rep.region_end = bumps.region_end();
    rep.all_blow_up = true;
    for (int j = 0; j < trials; ++j) {
        double s_start = std::min(ode->delta, 1e-2) * std::pow(10.0, -j);
        double m0 = ode->m_at(s_start);
        riccati::Options opt;
        opt.breakpoints = W.kinks();
        auto tr = riccati::integrate([&W](double x) { return W(x); }, channel, s_start, m0, rep.region_end, opt);
        Trial t;
        t.trial = j;
        t.s_start = s_start;
        t.blowup_radius = tr.escape_radius;
        t.max_m = channel == Sign::Plus ? tr.max_m : *std::min_element(tr.m.begin(), tr.m.end());
        for (std::size_t i = 0; i < tr.s.size(); ++i)
            if (tr.s[i] < 1.0) t.log_bound = std::max(t.log_bound, std::abs((tr.m[i] - 1.0) * std::log(tr.s[i])));
        t.blew_up_in_region = tr.blew_up && *tr.escape_radius <= rep.region_end;
        rep.all_blow_up = rep.all_blow_up && t.blew_up_in_region;
        rep.trials.push_back(t);
    }
    return rep;
}

} // namespace hdl::counterexample
