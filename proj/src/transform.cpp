#include "hdl/transform.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hdl/errors.hpp"
#include "hdl/forms.hpp"
#include "hdl/grid.hpp"

namespace hdl::transform {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr double kSwitch = 1e3;

// fixed 31-point panels, 8 per decade; callers split at kinks
double gk(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    int n = 1;
    if (a > 0.0) n = std::max(1, int(std::ceil(8.0 * std::log10(b / a) - 1e-9)));
    double q = a > 0.0 ? std::pow(b / a, 1.0 / n) : 0.0;
    double acc = 0.0, lo = a;
    for (int i = 0; i < n; ++i) {
        double hi = i + 1 == n ? b : lo * q;
        acc += GK::integrate(f, lo, hi, 0);
        lo = hi;
    }
    return acc;
}

double declared_tail(const PotentialSpec& W, double L) {
    const auto& t = W.tail();
    switch (t.type) {
    case potential::Tail::Type::Constant: return t.value / (2.0 * L * L);
    case potential::Tail::Type::Linear: return t.slope / L + t.coefficient / (3.0 * L * L * L);
    case potential::Tail::Type::None: break;
    }
    // undeclared tail: integrate numerically and insist the last decade is negligible
    double acc = 0.0, last = 0.0;
    try {
        for (double a = L; a < L * 1e6; a *= 10.0) {
            last = integrate_w_s3(W, a, 10.0 * a);
            acc += last;
        }
    } catch (const DomainError&) {
        throw DivergenceError("tail of W s^-3 not computable: W undefined at large s");
    }
    if (!(std::abs(last) <= 1e-10 * std::abs(acc)) || !std::isfinite(acc))
        throw DivergenceError("tail of W s^-3 does not converge");
    return acc;
}

} // namespace

TestFunction smooth_bump(double lo, double hi, double amplitude) {
    if (!(hi > lo)) throw SupportError("bump needs lo < hi");
    TestFunction f;
    f.lo = lo;
    f.hi = hi;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    f.u = [=](double r) {
        double xi = (r - c) / h;
        if (std::abs(xi) >= 1.0) return 0.0;
        return amplitude * std::exp(-1.0 / (1.0 - xi * xi));
    };
    f.du = [=](double r) {
        double xi = (r - c) / h;
        if (std::abs(xi) >= 1.0) return 0.0;
        double d = 1.0 - xi * xi;
        return amplitude * std::exp(-1.0 / d) * (-2.0 * xi / (d * d)) / h;
    };
    return f;
}

double integrate_w_s3(const PotentialSpec& W, double a, double b) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a};
    for (double d = a * 10.0; d < b; d *= 10.0) cuts.push_back(d);
    cuts.push_back(b);
    cuts = with_nodes(cuts, W.kinks());
    auto f = [&](double s) { return W(s) / (s * s * s); };
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc += gk(f, cuts[i], cuts[i + 1]);
    return acc;
}

double tail_integral(const PotentialSpec& W, double r) {
    if (!(r > 0.0)) throw DomainError("tail integral needs r > 0");
    double L = std::max(r, kSwitch);
    return integrate_w_s3(W, r, L) + declared_tail(W, L);
}

double y_of_r(const PotentialSpec& W, double r) {
    double J = tail_integral(W, r);
    double y = 1.0 / (1.0 / r + J);
    if (!std::isfinite(y)) throw DivergenceError("y(r) not finite");
    return y;
}

double r_of_y(const PotentialSpec& W, double y) {
    if (!(y > 0.0)) throw InversionError("y must be positive");
    // y(r) < r, so r > y; grow the bracket until y(hi) exceeds y
    double lo = y, hi = 2.0 * y;
    int guard = 0;
    while (y_of_r(W, hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 200) throw InversionError("y outside the range of y(r)");
    }
    auto f = [&](double r) { return y_of_r(W, r) - y; };
    while (hi - lo > 1e-13 * hi) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double v_of_y(const PotentialSpec& W, double y) {
    double r = r_of_y(W, y);
    double w = W(r);
    return w * r * r * r * r / (y * y * (w + r));
}

double v_second_form(const PotentialSpec& W, double r) {
    // int_1^inf (t r + W(t r)) t^-3 dt, integrated in t
    double T = std::max(1.0, kSwitch / r);
    std::vector<double> cuts{1.0};
    for (double d = 10.0; d < T; d *= 10.0) cuts.push_back(d);
    cuts.push_back(T);
    std::vector<double> kt;
    for (double k : W.kinks()) kt.push_back(k / r);
    cuts = with_nodes(cuts, kt);
    auto f = [&](double t) { return (t * r + W(t * r)) / (t * t * t); };
    double I = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) I += gk(f, cuts[i], cuts[i + 1]);
    // past t = T: r^2 (1/L + tail) with L = T r
    double L = T * r;
    I += r * r * (1.0 / L + declared_tail(W, L));
    double w = W(r);
    return w / (r + w) * I * I;
}

VariableMap::VariableMap(PotentialSpec W, std::vector<double> r_grid) : W_(std::move(W)), r_(std::move(r_grid)) {
    std::size_t n = r_.size();
    if (n < 2 || !(r_.front() > 0.0)) throw GridError("variable map needs a positive grid");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(r_[i + 1] > r_[i])) throw GridError("variable map grid not increasing");
    J_.assign(n, 0.0);
    J_[n - 1] = tail_integral(W_, r_[n - 1]);
    for (std::size_t i = n - 1; i-- > 0;) J_[i] = J_[i + 1] + integrate_w_s3(W_, r_[i], r_[i + 1]);
    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) y_[i] = 1.0 / (1.0 / r_[i] + J_[i]);
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(y_[i + 1] > y_[i])) throw GridError("y(r) not increasing on the grid");
}

double VariableMap::J_at(double r, std::size_t& idx) const {
    if (r >= r_.back()) {
        idx = r_.size() - 1;
        return r == r_.back() ? J_.back() : tail_integral(W_, r);
    }
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    idx = std::size_t(it - r_.begin());
    return J_[idx] + integrate_w_s3(W_, r, r_[idx]);
}

double VariableMap::y(double r) const {
    if (r == 0.0) return 0.0;
    std::size_t idx;
    return 1.0 / (1.0 / r + J_at(r, idx));
}

double VariableMap::r_of_y(double yq) const {
    if (yq == 0.0) return 0.0;
    if (!(yq > 0.0) || yq > y_.back()) throw InversionError("y outside the tabulated range");
    auto it = std::lower_bound(y_.begin(), y_.end(), yq);
    std::size_t i = std::size_t(it - y_.begin());
    if (i < y_.size() && y_[i] == yq) return r_[i];
    double hi = r_[i];
    double lo = std::max(yq, i == 0 ? 0.0 : r_[i - 1]);
    double Jhi = J_[i];
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        double yr = 1.0 / (1.0 / r + Jhi + integrate_w_s3(W_, r, r_[i]));
        double f = yr - yq;
        if (f < 0.0)
            lo = r;
        else
            hi = r;
        double d = yr * yr * (1.0 / (r * r) + W_(r) / (r * r * r));
        double step = f / d;
        double next = r - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) <= 1e-15 * r || hi - lo <= 1e-15 * hi) return next;
        r = next;
    }
    return r;
}

double VariableMap::V_at_r(double r) const {
    double w = W_(r), yy = y(r);
    return w * r * r * r * r / (yy * yy * (w + r));
}

double VariableMap::V(double yq) const { return V_at_r(r_of_y(yq)); }

namespace {

double rel_diff(double a, double b) {
    double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::vector<double> support_grid(double lo, double hi, std::size_t nodes, const std::vector<double>& kinks) {
    // uniform on each piece between kinks, same spacing throughout
    std::vector<double> br{lo};
    for (double k : kinks)
        if (k > lo && k < hi) br.push_back(k);
    std::sort(br.begin() + 1, br.end());
    br.push_back(hi);
    double h = (hi - lo) / double(nodes - 1);
    std::vector<double> g{lo};
    for (std::size_t j = 0; j + 1 < br.size(); ++j) {
        double len = br[j + 1] - br[j];
        auto cells = std::max<std::size_t>(1, std::size_t(std::llround(len / h)));
        for (std::size_t i = 1; i < cells; ++i) g.push_back(br[j] + len * double(i) / double(cells));
        g.push_back(br[j + 1]);
    }
    return g;
}

} // namespace

EquivalenceReport equivalence_check(const PotentialSpec& W, const TestFunction& u, std::size_t nodes) {
    if (u.lo < 0.0 || !(u.hi > u.lo)) throw SupportError("test function support must be [lo, hi] with 0 <= lo < hi");
    if (u.u(u.lo) != 0.0 || u.u(u.hi) != 0.0) throw SupportError("test function nonzero at the support boundary");

    auto rg = support_grid(u.lo, u.hi, nodes, W.kinks());
    std::vector<double> f1(rg.size()), f2(rg.size());
    for (std::size_t i = 0; i < rg.size(); ++i) {
        double r = rg[i];
        if (r == 0.0) continue;
        double w = W(r), du = u.du(r), uu = u.u(r);
        f1[i] = r * r * r / (r + w) * du * du;
        f2[i] = w * r * uu * uu;
    }
    EquivalenceReport rep;
    rep.nodes = rg.size();
    rep.lhs23 = trapezoid(rg, f1);
    rep.rhs23 = trapezoid(rg, f2);

    std::vector<double> pos(rg.begin() + (rg.front() == 0.0 ? 1 : 0), rg.end());
    VariableMap map(W, pos);
    double ylo = u.lo == 0.0 ? 0.0 : map.y(u.lo);
    double yhi = map.y(u.hi);
    std::vector<double> ky;
    for (double k : W.kinks())
        if (k > u.lo && k < u.hi) ky.push_back(map.y(k));
    auto yg = support_grid(ylo, yhi, nodes, ky);
    std::vector<double> g1(yg.size()), g2(yg.size());
    for (std::size_t i = 0; i < yg.size(); ++i) {
        double y = yg[i];
        if (y == 0.0) continue;
        double r = (i == 0) ? u.lo : (i + 1 == yg.size() ? u.hi : map.r_of_y(y));
        double w = W(r);
        double q = u.u(r);
        double dq = u.du(r) * r * r * r / (y * y * (r + w));
        double V = w * r * r * r * r / (y * y * (w + r));
        g1[i] = y * y * dq * dq;
        g2[i] = V * q * q;
    }
    rep.lhsAA2 = trapezoid(yg, g1);
    rep.rhsAA2 = trapezoid(yg, g2);
    rep.rel_mismatch = std::max(rel_diff(rep.lhs23, rep.lhsAA2), rel_diff(rep.rhs23, rep.rhsAA2));
    return rep;
}

EquivalenceReport equivalence_check(const PotentialSpec& W, const GridFunction& u) {
    u.validate();
    if (u.v.front() != 0.0 || u.v.back() != 0.0) throw SupportError("grid function nonzero at the boundary");
    const auto& r = u.r;
    std::size_t n = r.size();
    std::vector<double> du(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = r[i] - r[i - 1], h1 = r[i + 1] - r[i];
        du[i] = (u.v[i + 1] * h0 * h0 - u.v[i - 1] * h1 * h1 + u.v[i] * (h1 * h1 - h0 * h0)) / (h0 * h1 * (h0 + h1));
    }
    // piecewise-linear reconstruction of u and u' on the sampled range
    auto interp = [&r](const std::vector<double>& f, double x) {
        if (x <= r.front() || x >= r.back()) return 0.0;
        auto it = std::upper_bound(r.begin(), r.end(), x);
        std::size_t i = std::size_t(it - r.begin());
        double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
        return f[i - 1] * (1 - t) + f[i] * t;
    };
    TestFunction tf;
    tf.lo = r.front();
    tf.hi = r.back();
    auto vals = u.v;
    tf.u = [interp, vals](double x) { return interp(vals, x); };
    tf.du = [interp, du](double x) { return interp(du, x); };
    return equivalence_check(W, tf, n);
}

std::vector<double> g_chain(const TestFunction& u, int k, double r, const iterlog::LogTowerParams& p) {
    if (k < 1) throw DepthError("telescope depth must be >= 1");
    if (k + 1 > p.max_depth) throw DepthError("telescope depth exceeds max_depth");
    auto t = iterlog::partial_tower(r, k + 1, p);
    // g_{k+1}(tau_{k+1}) = sqrt(r pi_k) u(r); walk back with g_j = sqrt(tau_j) g_{j+1}
    std::vector<double> g(k + 1);
    g[k] = std::sqrt(r * t.pi[k - 1]) * u.u(r);
    for (int j = k - 1; j >= 0; --j) g[j] = std::sqrt(1.0 / t.x[j]) * g[j + 1];
    return g;
}

TelescopeReport telescope(const TestFunction& u, int k, double R, const iterlog::LogTowerParams& p, std::size_t nodes) {
    p.validate();
    if (k < 1) throw DepthError("telescope depth must be >= 1");
    if (k + 1 > p.max_depth) throw DepthError("telescope depth exceeds max_depth");
    if (!(R < std::exp(p.a))) throw SupportError("telescope needs R < e^a");
    if (!(u.lo > 0.0) || u.hi > R || u.hi >= p.domain_end())
        throw SupportError("test function must be supported in (0, min(R, e^(a-1)))");

    auto rg = uniform_grid(u.lo, u.hi, nodes);
    std::vector<double> f1(nodes), f2(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        double r = rg[i], du = u.du(r), uu = u.u(r);
        auto t = iterlog::partial_tower(r, k, p);
        double s2 = 1.0;
        for (double v : t.pi) s2 += v * v;
        f1[i] = r * r * du * du;
        f2[i] = 0.25 * s2 * uu * uu;
    }
    TelescopeReport rep;
    rep.lhs = trapezoid(rg, f1);
    rep.hardy_part = trapezoid(rg, f2);

    // remainder on a uniform grid in tau = 1/X_{k+1}(r)
    double tau_lo = 1.0 / iterlog::xk(u.hi, k + 1, p);
    double tau_hi = 1.0 / iterlog::xk(u.lo, k + 1, p);
    auto tg = uniform_grid(tau_lo, tau_hi, nodes);
    std::vector<double> f3(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        // invert the tower: X_{j-1} = exp(a - 1/X_j)
        double x = 1.0 / tg[i];
        for (int j = k + 1; j > 1; --j) x = std::exp(p.a - 1.0 / x);
        double r = std::exp(p.a - 1.0 / x);
        auto t = iterlog::partial_tower(r, k, p);
        double pi = t.pi[k - 1], sig = t.sigma[k - 1];
        // dg/dtau = -(r / pi) d/dr [sqrt(r pi) u]
        double dgdr = std::sqrt(r * pi) * (u.du(r) + u.u(r) * (1.0 + sig) / (2.0 * r));
        double dg = -(r / pi) * dgdr;
        f3[i] = dg * dg;
    }
    rep.remainder = trapezoid(tg, f3);
    rep.rhs = rep.hardy_part + rep.remainder;
    rep.rel_mismatch = rel_diff(rep.lhs, rep.rhs);
    return rep;
}

double truncated_optimality_quotient(int k, double t_lo, double t_hi, const iterlog::LogTowerParams& p,
                                     std::size_t nodes) {
    p.validate();
    if (k < 1) throw DepthError("truncation depth must be >= 1");
    if (!(t_hi > t_lo) || t_hi >= p.a - 1.0) throw SupportError("window must lie in t < a - 1");
    // q = y^{-1/2} g, t = log y:  int y^2 q'^2 dy = int g_t^2 + g^2/4 dt,  int V q^2 dy = int V g^2 dt
    // nodes uniform in log(a - t)
    auto rg = log_grid_n(p.a - t_hi, p.a - t_lo, nodes);
    auto vk = [&p, k](double r) {
        double x = 1.0 / r, pi = 1.0, s = 1.0;
        for (int j = 0; j < k; ++j) {
            if (j > 0) x = 1.0 / (p.a - std::log(x));
            pi *= x;
            s += pi * pi;
        }
        return 0.25 * s;
    };
    auto P = forms::pencil(rg, [](double r) { return 1.0 / r; }, [&vk](double r) { return vk(r) * r; });
    auto M = forms::pencil(rg, [](double) { return 0.0; }, [](double r) { return r; });
    for (std::size_t i = 0; i < P.diag.size(); ++i) P.diag[i] += 0.25 * M.mass[i];
    return tridiag::smallest_eigenvalue_bisection(P);
}

} // namespace hdl::transform
