#include "hdl/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hdl/errors.hpp"

namespace hdl::forms {

Channel::Channel(int n) : n_(n) {
    if (n == -1) throw DomainError("channel n = -1 does not exist");
}

double stiffness(const GridFunction& v, const Weight& a, int n) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        double dt = std::log(v.r[i + 1] / v.r[i]);
        double rm = std::sqrt(v.r[i]) * std::sqrt(v.r[i + 1]);
        double d = (v.v[i + 1] - v.v[i]) / dt - n * 0.5 * (v.v[i] + v.v[i + 1]);
        acc += a(rm) * d * d * dt;
    }
    return acc;
}

double mass(const GridFunction& v, const Weight& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        double dt = std::log(v.r[i + 1] / v.r[i]);
        acc += 0.5 * dt * (b(v.r[i]) * v.v[i] * v.v[i] + b(v.r[i + 1]) * v.v[i + 1] * v.v[i + 1]);
    }
    return acc;
}

tridiag::Pencil pencil(const std::vector<double>& r, const Weight& a, const Weight& b) {
    std::size_t N = r.size();
    if (N < 3) throw GridError("pencil needs at least one interior node");
    std::vector<double> k(N - 1), dt(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        dt[i] = std::log(r[i + 1] / r[i]);
        if (!(dt[i] > 0.0)) throw GridError("degenerate grid spacing");
        k[i] = a(std::sqrt(r[i]) * std::sqrt(r[i + 1])) / dt[i];
    }
    tridiag::Pencil p;
    std::size_t n = N - 2;
    p.diag.resize(n);
    p.mass.resize(n);
    p.off.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t i = j + 1;
        p.diag[j] = k[i - 1] + k[i];
        p.mass[j] = b(r[i]) * 0.5 * (dt[i - 1] + dt[i]);
        if (j + 1 < n) p.off[j] = -k[i];
    }
    return p;
}

namespace {

double pot_weight(const PotentialSpec& W, int n, double r) {
    double w = W(r), dw = W.derivative(r), rw = r + w;
    return r * r * ((n * n + 2.0 * n) * rw - (1.0 + dw) * r * n) / (rw * rw);
}

double discrete_min(const std::vector<double>& r, const Weight& a, const Weight& b) {
    return tridiag::smallest_eigenpair(pencil(r, a, b)).value;
}

} // namespace

FormReport dirac_channel_form(const PotentialSpec& W, Channel ch, const GridFunction& v) {
    v.validate();
    int n = ch.n();
    FormReport rep;
    rep.channel = ch;
    rep.grid_size = v.size();
    rep.value = stiffness(v, [&](double r) { return r * r / (r + W(r)); });
    if (n != 0) rep.value += mass(v, [&](double r) { return pot_weight(W, n, r); });
    return rep;
}

double channel_kinetic(const PotentialSpec& W, Channel ch, const GridFunction& v) {
    v.validate();
    return stiffness(v, [&](double r) { return r * r / (r + W(r)); }, ch.n());
}

RpetitReport rpetit_check(const PotentialSpec& W, double R, std::span<const double> grid, double tol) {
    RpetitReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (double r : grid) {
        if (!(r > 0.0) || r >= R) throw GridError("rpetit grid must lie in (0, R)");
        double w = W(r), rdw = r * W.derivative(r);
        double lo = rdw + r, hi = 3.0 * w + 2.0 * r - rdw;
        rep.r.push_back(r);
        rep.lower_margin.push_back(lo);
        rep.upper_margin.push_back(hi);
        rep.min_margin = std::min({rep.min_margin, lo, hi});
    }
    rep.passed = rep.min_margin >= -tol;
    return rep;
}

FormReport verify_hardy(const GridFunction& v) {
    v.validate();
    auto a = [](double r) { return r; };
    auto b = [](double r) { return r; };
    double num = stiffness(v, a), den = mass(v, b);
    FormReport rep;
    rep.grid_size = v.size();
    rep.value = num - 0.25 * den;
    rep.quotient = num / den;
    rep.discrete_min = discrete_min(v.r, a, b);
    return rep;
}

FormReport verify_R3(const GridFunction& v) {
    v.validate();
    auto a = [](double r) { return r * r; };
    auto b = [](double r) { return r * r; };
    double num = stiffness(v, a), den = mass(v, b);
    FormReport rep;
    rep.grid_size = v.size();
    rep.value = num - den;
    rep.quotient = num / den;
    rep.discrete_min = discrete_min(v.r, a, b);
    return rep;
}

FormReport verify_R6(double nu, const GridFunction& v) {
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("nu must lie in (0, 1)");
    v.validate();
    double g = std::sqrt(1.0 - nu * nu);
    double kin = stiffness(v, [&](double r) { return r * r / (r * (1.0 + g) + nu); });
    double rest = mass(v, [&](double r) { return (1.0 - g) * r * r * r - nu * r * r; });
    double norm = mass(v, [](double r) { return r * r * r; });
    FormReport rep;
    rep.grid_size = v.size();
    rep.value = kin + rest;
    rep.quotient = rep.value / norm;
    return rep;
}

double r1_form(const GridFunction& v) {
    double k = stiffness(v, [](double r) { return r * r / (r + 1.0); });
    double m = mass(v, [](double r) { return r * r * r; });
    double p = mass(v, [](double r) { return r * r; });
    return k + m - p;
}

double r2_form(const GridFunction& v) {
    double k = stiffness(v, [](double r) { return r * r; });
    double p = mass(v, [](double r) { return r * r; });
    return k - p;
}

namespace {

std::size_t node_of(const GridFunction& v, double R) {
    auto it = std::lower_bound(v.r.begin(), v.r.end(), R);
    if (it != v.r.end() && std::abs(*it - R) <= 1e-14 * R) return std::size_t(it - v.r.begin());
    if (it != v.r.begin() && std::abs(*(it - 1) - R) <= 1e-14 * R) return std::size_t(it - v.r.begin() - 1);
    throw GridError("jump radius is not a grid node");
}

// value of v at R; zero outside the sampled range
double value_at_jump(const GridFunction& v, double R) {
    if (R < v.r.front() * (1 - 1e-14) || R > v.r.back() * (1 + 1e-14)) {
        if (!v.dirichlet) throw GridError("jump radius outside a non-Dirichlet grid");
        return 0.0;
    }
    return v.v[node_of(v, R)];
}

// int r (2m +- r m' - (r+W) m^2) v^2 dr with one-sided multipliers at every node
double multiplier_mass(const PotentialSpec& W, const MultiplierPair& mp, Sign sg, const GridFunction& v) {
    double c = sign_value(sg);
    auto q = [&](double r, bool left) {
        double m = left ? mp.m_left(sg, r) : mp.m_right(sg, r);
        double dm = left ? mp.dm_left(sg, r) : mp.dm_right(sg, r);
        return r * r * (2.0 * m + c * r * dm - (r + W(r)) * m * m);
    };
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v.v[i] == 0.0 && v.v[i + 1] == 0.0) continue;
        double dt = std::log(v.r[i + 1] / v.r[i]);
        double a = v.v[i] == 0.0 ? 0.0 : q(v.r[i], false) * v.v[i] * v.v[i];
        double b = v.v[i + 1] == 0.0 ? 0.0 : q(v.r[i + 1], true) * v.v[i + 1] * v.v[i + 1];
        acc += 0.5 * dt * (a + b);
    }
    return acc;
}

} // namespace

R8Report verify_R8(const PotentialSpec& W, const GridFunction& vp, const GridFunction& vm, const MultiplierPair& mp,
                   Channel plus, Channel minus) {
    vp.validate();
    vm.validate();
    R8Report rep;
    rep.kinetic_plus = channel_kinetic(W, plus, vp);
    rep.kinetic_minus = channel_kinetic(W, minus, vm);
    auto mw = [](double r) { return r * r * r; };
    auto pw = [&](double r) { return W(r) * r * r; };
    rep.mass = mass(vp, mw) + mass(vm, mw);
    rep.potential = mass(vp, pw) + mass(vm, pw);
    rep.pp1_rhs = multiplier_mass(W, mp, Sign::Plus, vp) + multiplier_mass(W, mp, Sign::Minus, vm);

    double sphere = 0.0;
    for (const auto& j : mp.jumps_plus) {
        double x = value_at_jump(vp, j.radius);
        rep.surface -= j.size * j.radius * j.radius * x * x;
        sphere += j.radius * j.radius * x * x;
    }
    for (const auto& j : mp.jumps_minus) {
        double x = value_at_jump(vm, j.radius);
        rep.surface += j.size * j.radius * j.radius * x * x;
        sphere += j.radius * j.radius * x * x;
    }
    rep.C_R = mp.surface_constant();
    double lit = -std::numeric_limits<double>::infinity();
    for (const auto& j : mp.jumps_minus) lit = std::max(lit, j.size);
    for (const auto& j : mp.jumps_plus) lit = std::max(lit, j.size);
    rep.C_R_literal = std::isfinite(lit) ? -lit : 0.0;

    double K = rep.kinetic_plus + rep.kinetic_minus;
    rep.pp1_margin = K + rep.surface - rep.pp1_rhs;
    rep.r8_margin = K + rep.mass - rep.potential - rep.C_R * sphere;
    rep.scale = std::abs(K) + rep.mass + std::abs(rep.potential) + std::abs(rep.pp1_rhs) + std::abs(rep.surface);
    rep.form.value = rep.pp1_margin;
    rep.form.grid_size = vp.size() + vm.size();
    rep.form.channel = plus;
    return rep;
}

GridFunction dilate(const GridFunction& v, double lambda) {
    GridFunction out;
    out.dirichlet = v.dirichlet;
    double f = std::pow(lambda, -1.5);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.r.push_back(v.r[i] * lambda);
        out.v.push_back(v.v[i] * f);
    }
    return out;
}

std::vector<ScalingRow> scaling_demo(const PotentialSpec& W, const GridFunction& v, std::span<const double> lambdas) {
    v.validate();
    std::vector<ScalingRow> rows;
    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw DomainError("scaling factor must be positive");
        auto g = dilate(v, lam);
        ScalingRow row;
        row.lambda = lam;
        row.kinetic = stiffness(g, [&](double r) { return r * r / (r + W(r)); });
        row.mass = mass(g, [](double r) { return r * r * r; });
        row.potential = mass(g, [&](double r) { return W(r) * r * r; });
        row.gradient = stiffness(g, [](double r) { return r; });
        row.grad_over_mass = row.gradient / row.mass;
        row.margin = row.kinetic + row.mass - row.potential;
        rows.push_back(row);
    }
    return rows;
}

std::vector<GridFunction> bump_corpus(const std::vector<double>& grid, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double lg0 = std::log10(grid.front()), lg1 = std::log10(grid.back());
    std::vector<GridFunction> out;
    out.reserve(count);
    while (out.size() < count) {
        double span = 0.3 + 1.7 * U(rng);
        double l0 = lg0 + 0.05 + (lg1 - lg0 - span - 0.1) * U(rng);
        double lo = std::pow(10.0, l0), hi = std::pow(10.0, l0 + span);
        double c = lo + (hi - lo) * U(rng);
        double w = (hi - lo) * (0.1 + 0.9 * U(rng));
        double c1 = 2 * U(rng) - 1, c2 = 2 * U(rng) - 1;
        double amp = (0.5 + 1.5 * U(rng)) * (U(rng) < 0.5 ? -1.0 : 1.0);
        double half = 0.5 * (hi - lo);
        auto f = [=](double r) {
            if (r <= lo || r >= hi) return 0.0;
            double xi = (r - lo) / (hi - lo);
            double env = (r - lo) * (hi - r) / (half * half);
            double poly = 1.0 + c1 * xi + c2 * xi * xi;
            double d = (r - c) / w;
            return amp * env * env * poly * std::exp(-d * d);
        };
        out.push_back(sample(grid, f, true));
    }
    return out;
}

FormReport refine(const std::function<FormReport(int)>& make, int ppd0, int levels) {
    FormReport last;
    std::vector<std::pair<double, double>> hist;
    for (int l = 0; l < levels; ++l) {
        int ppd = ppd0 << l;
        last = make(ppd);
        hist.emplace_back(std::log(10.0) / ppd, last.value);
    }
    last.refinement_history = hist;
    return last;
}

} // namespace hdl::forms
