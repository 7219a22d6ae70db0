#include "hdl/singular_ode.hpp"

#include <algorithm>
#include <cmath>

#include "hdl/errors.hpp"

namespace hdl::singular_ode {

namespace {

double s_of_x(double x, double a) { return std::exp(a - 1.0 / x); }

// s n' from the ODE, given n, s, E = W_inf - 1
double sdn(double n, double s, double E, double c) {
    return n * n + 2.0 * c * s * n + s * n * n + (2.0 + 2.0 * c * n + n * n) * E;
}

double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t) {
    double h = t1 - t0, u = (t - t0) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

} // namespace

Coefficients scaled_coefficients(double x, const LogTowerParams& p, Sign channel) {
    double c = sign_value(channel);
    auto t = iterlog::tower_sums_from_x1(x, p);
    double s = s_of_x(x, p.a);
    double E = t.sum_pi2 / 8.0, nb = 0.5 * t.sigma;
    Coefficients k;
    k.F0 = (s + E) * (2.0 * c + nb);
    // nb - 2E/nb written as cross/sigma to avoid cancellation
    k.F1 = t.cross / t.sigma + 2.0 * c * s + 2.0 * s * nb + 2.0 * c * E + 2.0 * E * nb;
    k.F2 = nb * (1.0 + s + E);
    return k;
}

CoefficientFunctions coefficient_functions(const LogTowerParams& p, Sign channel) {
    p.validate();
    auto get = [p, channel](double s) {
        double x = iterlog::x1(s, p);
        return scaled_coefficients(x, p, channel);
    };
    CoefficientFunctions f;
    f.f0 = [get](double s) { return get(s).F0 / s; };
    f.f1 = [get](double s) { return get(s).F1 / s; };
    f.f2 = [get](double s) { return get(s).F2 / s; };
    return f;
}

PicardMap::PicardMap(double delta, const LogTowerParams& p, Sign channel, double x_min,
                     int nodes_per_decade) {
    double x_hi = iterlog::x1(delta, p);
    if (!(x_min < x_hi)) throw DomainError("x_min must lie below X_1(delta)");
    x_ = log_grid(x_min, x_hi, nodes_per_decade);
    du_ = std::log(x_[1] / x_[0]);
    std::size_t n = x_.size();
    F0_.resize(n);
    F1_.resize(n);
    F2_.resize(n);
    weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto k = scaled_coefficients(x_[i], p, channel);
        double x2 = x_[i] * x_[i];
        F0_[i] = k.F0 / x2;
        F1_[i] = k.F1 / x2;
        F2_[i] = k.F2 / x2;
        weight_[i] = 1.0 / x_[i] - p.a;
    }
}

double PicardMap::integrand(std::size_t i, double w) const {
    return F0_[i] + F1_[i] * w + F2_[i] * w * w;
}

std::vector<double> PicardMap::apply(const std::vector<double>& w) const {
    std::size_t n = x_.size();
    std::vector<double> out(n);
    // below x_min the integrand is flat to leading order
    double g_prev = integrand(0, w[0]) * x_[0];
    double acc = g_prev;
    out[0] = acc;
    for (std::size_t i = 1; i < n; ++i) {
        double g = integrand(i, w[i]) * x_[i];
        acc += 0.5 * du_ * (g_prev + g);
        out[i] = acc;
        g_prev = g;
    }
    return out;
}

double PicardMap::weighted_norm(const std::vector<double>& u) const {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]) * weight_[i]);
    return m;
}

namespace {

struct Attempt {
    bool ok = false;
    std::vector<double> w, dist;
    int iterations = 0;
};

Attempt iterate(const PicardMap& T, double C, double tol, const SolveOptions& opt) {
    Attempt at;
    const auto& x = T.x();
    std::vector<double> w(x.size(), 0.0);
    if (opt.initial)
        for (std::size_t i = 0; i < x.size(); ++i) w[i] = opt.initial(x[i]);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        auto next = T.apply(w);
        std::vector<double> diff(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) diff[i] = next[i] - w[i];
        double d = T.weighted_norm(diff);
        at.dist.push_back(d);
        w.swap(next);
        at.iterations = it;
        if (T.weighted_norm(w) > C) return at;
        std::size_t k = at.dist.size();
        if (k >= 3 && at.dist[k - 1] >= at.dist[k - 2] && d > tol) return at;
        if (d < tol) {
            at.ok = true;
            at.w = std::move(w);
            return at;
        }
    }
    return at;
}

} // namespace

OdeSolution solve(double delta, double C, double tol, const LogTowerParams& p, const SolveOptions& opt) {
    p.validate();
    if (!(C > 0.25)) throw DomainError("class constant C must exceed 1/4");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");

    for (int shrink = 0; shrink <= opt.max_shrinks; ++shrink) {
        PicardMap T(delta, p, opt.channel, opt.x_min, opt.nodes_per_decade);
        Attempt at = iterate(T, C, tol, opt);
        if (!at.ok) {
            delta *= 0.5;
            continue;
        }
        OdeSolution sol;
        sol.delta = delta;
        sol.C = C;
        sol.tol = tol;
        sol.channel = opt.channel;
        sol.params = p;
        sol.shrinks = shrink;
        sol.iterations = at.iterations;
        sol.distances = at.dist;
        sol.x = T.x();
        sol.w = at.w;
        sol.dwdx.resize(sol.x.size());
        for (std::size_t i = 0; i < sol.x.size(); ++i) sol.dwdx[i] = T.integrand(i, sol.w[i]);
        sol.weighted_sup = T.weighted_norm(sol.w);
        auto tw = T.apply(sol.w);
        std::vector<double> diff(tw.size());
        for (std::size_t i = 0; i < tw.size(); ++i) diff[i] = tw[i] - sol.w[i];
        sol.fixed_point_defect = T.weighted_norm(diff);
        for (std::size_t i = 0; i < sol.x.size(); ++i) {
            double s = s_of_x(sol.x[i], p.a);
            if (s < 1e-300) continue;
            sol.samples.r.push_back(s);
            sol.samples.v.push_back(sol.w[i]);
        }
        auto res = residual(sol);
        for (double v : res.v) sol.residual_sup = std::max(sol.residual_sup, std::abs(v));
        return sol;
    }
    throw ContractionError("Picard iteration failed to contract after shrinking delta");
}

double OdeSolution::reach() const { return cont_t.empty() ? delta : std::exp(cont_t.back()); }

double OdeSolution::w_at(double s) const {
    if (!(s > 0.0) || s > delta * (1.0 + 1e-14)) throw DomainError("w_at outside (0, delta]");
    double xq = iterlog::x1(std::min(s, delta), params);
    if (xq <= x.front()) return w.front() * xq / x.front();
    double du = std::log(x[1] / x[0]);
    double u = std::log(xq / x.front()) / du;
    auto i = std::min<std::size_t>(std::size_t(u), x.size() - 2);
    // Hermite in log x, derivative dw/du = x dw/dx
    return hermite(std::log(x[i]), std::log(x[i + 1]), w[i], w[i + 1], x[i] * dwdx[i],
                   x[i + 1] * dwdx[i + 1], std::log(xq));
}

double OdeSolution::n_at(double s) const {
    if (s <= delta * (1.0 + 1e-14)) return iterlog::nbar(s, params) * (1.0 + w_at(s));
    if (cont_t.empty() || s > reach() * (1.0 + 1e-14)) throw DomainError("n_at beyond solution reach");
    double t = std::min(std::log(s), cont_t.back());
    auto it = std::upper_bound(cont_t.begin(), cont_t.end(), t);
    std::size_t i = std::min<std::size_t>(std::size_t(it - cont_t.begin()), cont_t.size() - 1);
    if (i == 0) i = 1;
    return hermite(cont_t[i - 1], cont_t[i], cont_n[i - 1], cont_n[i], cont_dn[i - 1], cont_dn[i], t);
}

double OdeSolution::dn_at(double s) const {
    double n = n_at(s);
    double E = iterlog::w_infinity(s, params) - 1.0;
    return sdn(n, s, E, sign_value(channel)) / s;
}

double OdeSolution::m_at(double s) const { return 1.0 + sign_value(channel) * n_at(s); }
double OdeSolution::dm_at(double s) const { return sign_value(channel) * dn_at(s); }

std::vector<double> OdeSolution::contraction_ratios() const {
    std::vector<double> r;
    for (std::size_t i = 1; i < distances.size(); ++i) r.push_back(distances[i] / distances[i - 1]);
    return r;
}

OdeSolution extend(const OdeSolution& sol, double s_end, double dt) {
    if (!(s_end > sol.delta)) return sol;
    if (!(s_end < sol.params.domain_end())) throw DomainError("continuation beyond domain_end");
    OdeSolution out = sol;
    out.cont_t.clear();
    out.cont_n.clear();
    out.cont_dn.clear();
    out.blowup.reset();
    const auto& p = sol.params;
    double c = sign_value(sol.channel);
    auto f = [&](double t, double n) {
        double s = std::exp(t);
        return sdn(n, s, iterlog::w_infinity(s, p) - 1.0, c);
    };
    double t = std::log(sol.delta), t_end = std::log(s_end);
    double n = sol.n_at(sol.delta);
    auto steps = std::size_t(std::ceil((t_end - t) / dt));
    double h = (t_end - t) / double(steps);
    double t0 = t;
    out.cont_t.push_back(t);
    out.cont_n.push_back(n);
    out.cont_dn.push_back(f(t, n));
    for (std::size_t k = 1; k <= steps; ++k) {
        double k1 = f(t, n);
        double k2 = f(t + 0.5 * h, n + 0.5 * h * k1);
        double k3 = f(t + 0.5 * h, n + 0.5 * h * k2);
        double k4 = f(t + h, n + h * k3);
        n += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t = (k == steps) ? t_end : t0 + double(k) * h;
        if (!std::isfinite(n) || std::abs(n) > 1e6) {
            out.blowup = std::exp(t);
            break;
        }
        out.cont_t.push_back(t);
        out.cont_n.push_back(n);
        out.cont_dn.push_back(f(t, n));
    }
    return out;
}

GridFunction residual(const OdeSolution& sol, std::optional<int> w_depth) {
    const auto& p = sol.params;
    double c = sign_value(sol.channel);
    GridFunction g;
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        double x = sol.x[i], s = s_of_x(x, p.a);
        if (s < 1e-300) continue;
        auto t = iterlog::tower_sums_from_x1(x, p);
        auto k = scaled_coefficients(x, p, sol.channel);
        double w = sol.w[i];
        double nb = 0.5 * t.sigma;
        double s_dnb = 0.5 * t.sum_pi_sigma;
        double s_dw = k.F0 + k.F1 * w + k.F2 * w * w;
        double n = nb * (1.0 + w);
        double s_dn = s_dnb * (1.0 + w) + nb * s_dw;
        double E = w_depth ? iterlog::w_infinity_truncated(s, *w_depth, p) - 1.0 : t.sum_pi2 / 8.0;
        double rhs = (s_dn - n * n - 2.0 * c * s * n - s * n * n) / (2.0 + 2.0 * c * n + n * n);
        g.r.push_back(s);
        g.v.push_back(E - rhs);
    }
    return g;
}

} // namespace hdl::singular_ode
