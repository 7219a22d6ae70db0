#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hdl/errors.hpp"
#include "hdl/forms.hpp"
#include "hdl/grid.hpp"

using namespace hdl;
using namespace hdl::forms;
using potential::MultiplierPair;
using potential::PotentialSpec;

namespace {

const iterlog::LogTowerParams P{};

GridFunction poly_bump(const std::vector<double>& g, double lo, double hi, double amp = 1.0) {
    return sample(g, [=](double r) { return r > lo && r < hi ? amp * std::pow((r - lo) * (hi - r), 3) : 0.0; }, true);
}

const PotentialSpec& W1() {
    static const PotentialSpec w = PotentialSpec::w1(P);
    return w;
}

} // namespace

TEST_SUITE("form_verifier") {

TEST_CASE("channel n = -1 is excluded") {
    CHECK_THROWS_AS(Channel(-1), DomainError);
    CHECK(Channel(-2).n() == -2);
}

TEST_CASE("quadrature of the forms against closed integrals") {
    // v = r on [1, 2], weights in t = log r: int a v_t^2 dt = int a r dr, int b v^2 dt = int b r dr
    auto g = log_grid(1.0, 2.0, 4000);
    GridFunction v = sample(g, [](double r) { return r; });
    CHECK(stiffness(v, [](double r) { return r; }) == rel(7.0 / 3.0).epsilon(1e-6));
    CHECK(mass(v, [](double r) { return r * r; }) == rel((16.0 - 1.0) / 4.0).epsilon(1e-6));
}

TEST_CASE("dirac channel form") {
    auto g = log_grid(1e-3, 10.0, 256);
    auto v = poly_bump(g, 0.2, 2.0);
    auto one = PotentialSpec::constant(1.0);
    auto f0 = dirac_channel_form(one, Channel(0), v);
    CHECK(f0.value == rel(stiffness(v, [](double r) { return r * r / (r + 1); })).epsilon(1e-14));
    auto f1 = dirac_channel_form(one, Channel(1), v);
    CHECK(f1.value > f0.value);
    // n = -2: weight reduces to 2 r (1 + W') / (r (r+W)^2) times r^2
    auto fm2 = dirac_channel_form(one, Channel(-2), v);
    double extra = mass(v, [](double r) { return 2.0 * r * r / ((r + 1) * (r + 1)) * r; });
    CHECK(fm2.value - f0.value == rel(extra).epsilon(1e-10));
    // kinetic form with the n v / r shift equals the expanded form for Dirichlet v
    for (int n : {-3, -2, 0, 1, 2})
        CHECK(channel_kinetic(one, Channel(n), v) == rel(dirac_channel_form(one, Channel(n), v).value).epsilon(1e-3));
}

TEST_CASE("channel dominance under rpetit") {
    auto W = PotentialSpec::w_infinity(P);
    REQUIRE(rpetit_check(W, 0.1, log_grid(1e-8, 0.099, 32)).passed);
    auto g = log_grid(1e-8, 0.1, 256);
    auto corpus = bump_corpus(g, 10, 5);
    for (const auto& v : corpus) {
        double base = dirac_channel_form(W, Channel(0), v).value;
        for (int n : {-3, -2, 1, 2}) CHECK(dirac_channel_form(W, Channel(n), v).value >= base);
    }
}

TEST_CASE("rpetit margins") {
    auto g = log_grid(1e-4, 0.09, 16);
    auto rep = rpetit_check(PotentialSpec::constant(1.0), 0.1, g);
    CHECK(rep.passed);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(rep.lower_margin[i] == rel(g[i]));
        CHECK(rep.upper_margin[i] == rel(3 + 2 * g[i]));
    }
    CHECK(rpetit_check(PotentialSpec::w_infinity(P), 0.1, log_grid(1e-12, 0.099, 16)).passed);
    auto bad = PotentialSpec::custom("r^-1/2", [](double r) { return 1 / std::sqrt(r); });
    CHECK_FALSE(rpetit_check(bad, 0.1, g).passed);
    CHECK_THROWS_AS(rpetit_check(bad, 0.01, g), GridError);
}

TEST_CASE("Hardy: discrete minimum and near-optimal profile") {
    auto g = log_grid_n(std::exp(-500.0), 1.0, 10000);
    auto v = sample(g, [](double r) { return (1 - r) / std::sqrt(r) * std::clamp((std::log(r) + 500) / 50, 0.0, 1.0); }, true);
    auto rep = verify_hardy(v);
    REQUIRE(rep.discrete_min);
    CHECK(*rep.discrete_min >= 0.25);
    CHECK(*rep.discrete_min <= 0.2501);
    CHECK(*rep.quotient > 0.25);
    CHECK(*rep.quotient < 0.26);
    // Sturm count against inverse iteration
    auto pen = pencil(g, [](double r) { return r; }, [](double r) { return r; });
    CHECK(tridiag::smallest_eigenpair(pen).value == rel(*rep.discrete_min).epsilon(1e-9));
    // scale invariance
    auto w = poly_bump(log_grid(1e-3, 10, 256), 0.1, 1.0);
    CHECK(*verify_hardy(dilate(w, 3.0)).quotient == rel(*verify_hardy(w).quotient).epsilon(1e-12));
}

TEST_CASE("R3: discrete minimum, hat function, scale invariance") {
    auto g = log_grid_n(std::exp(-340.0), 1.0, 10000);
    auto v = sample(g, [](double r) { return (1 - r) / std::sqrt(r); }, true);
    v.v.front() = 0;
    auto rep = verify_R3(v);
    CHECK(*rep.discrete_min >= 1.0);
    CHECK(*rep.discrete_min <= 1.001);
    auto h = log_grid(0.1, 10, 512);
    auto hat = sample(h, [](double r) { return std::max(0.0, 1 - std::abs(std::log10(r))); }, true);
    CHECK(*verify_R3(hat).quotient > 1.0);
    CHECK(*verify_R3(dilate(hat, 0.01)).quotient == rel(*verify_R3(hat).quotient).epsilon(1e-12));
}

TEST_CASE("R6: equality trial and positivity") {
    double nu = 0.5, gam = std::sqrt(1 - nu * nu);
    auto trial = [&](int ppd) {
        auto g = log_grid(1e-6, 1e2, ppd);
        auto v = sample(g, [&](double r) { return std::pow(r, gam - 1) * std::exp(-nu * r); });
        return verify_R6(nu, v);
    };
    auto fine = refine([&](int ppd) { return trial(ppd); }, 256, 3);
    CHECK(std::abs(*fine.quotient) < 1e-4);
    auto& h = fine.refinement_history;
    REQUIRE(h.size() == 3);
    CHECK(std::abs(h[2].second) < std::abs(h[1].second));
    CHECK(std::abs(h[1].second) < std::abs(h[0].second));

    auto g = log_grid(1e-6, 1e2, 256);
    for (const auto& v : bump_corpus(g, 100, 42)) {
        auto r = verify_R6(nu, v);
        CHECK(r.value >= -1e-8 * mass(v, [](double x) { return x * x * x; }));
    }
    // nu = 0.6: gap term uses sqrt(1 - nu^2) = 0.8
    auto v = poly_bump(g, 0.5, 3.0);
    double expect = stiffness(v, [](double r) { return r * r / (1.8 * r + 0.6); }) +
                    mass(v, [](double r) { return 0.2 * r * r * r - 0.6 * r * r; });
    CHECK(verify_R6(0.6, v).value == rel(expect).epsilon(1e-13));
    CHECK(verify_R6(0.9, poly_bump(g, 20.0, 40.0)).value > 0.0);
    CHECK_THROWS_AS(verify_R6(1.0, v), DomainError);
}

TEST_CASE("R8: trivial multipliers") {
    auto g = log_grid(1e-4, 10, 256);
    auto one = PotentialSpec::constant(1.0);
    auto mp = MultiplierPair::constant(1, 1);
    for (const auto& v : bump_corpus(g, 10, 1)) {
        auto r = verify_R8(one, v, v, mp);
        CHECK(r.surface == 0.0);
        CHECK(r.pp1_margin >= -1e-8 * r.scale);
    }
}

TEST_CASE("R8: completing the square") {
    // constant multiplier m with W = W^{+,m}: the PP1 margin is a perfect square
    double m = 0.5;
    auto W = PotentialSpec::custom("const-m", [m](double s) { return potential::w_pm(m, 0, s, Sign::Plus); });
    auto mp = MultiplierPair::constant(m, m);
    auto g = log_grid(1e-3, 10, 2048);
    auto v = poly_bump(g, 0.1, 3.0);
    auto zero = sample(g, [](double) { return 0.0; }, true);
    auto r = verify_R8(W, v, zero, mp);
    // int g (w + h r v / g)^2 r^2 with g = r/(r+W), h = m/r, w = v'
    std::vector<double> f(g.size());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        double x = g[i], dv = (v.v[i + 1] - v.v[i - 1]) / (g[i + 1] - g[i - 1]);
        double gg = x / (x + W(x));
        double t = dv + (m / x) * x * v.v[i] / gg;
        f[i] = gg * t * t * x * x;
    }
    CHECK(r.pp1_margin == rel(trapezoid(g, f)).epsilon(1e-3));
}

TEST_CASE("R8: W1 corpus and the surface term") {
    auto mp = *W1().multipliers();
    double R = W1().radii()->plus;
    std::vector<double> jr{R};
    auto g = with_nodes(log_grid(1e-6, 1e2, 256), jr);
    auto corpus = bump_corpus(g, 200, 42);
    for (std::size_t i = 0; i < corpus.size(); i += 2) {
        auto r = verify_R8(W1(), corpus[i], corpus[i + 1], mp);
        CHECK(r.pp1_margin >= -1e-8 * r.scale);
        CHECK(r.r8_margin >= -1e-8 * r.scale);
    }
    // concentrated at R: the R8 surface term C(R) R^2 v(R)^2 is negative and outweighs mass - potential
    auto v = poly_bump(g, R * 0.99, R * 1.01);
    double vr = v.v[std::size_t(std::find(g.begin(), g.end(), R) - g.begin())];
    REQUIRE(vr > 0.0);
    auto zero = sample(g, [](double) { return 0.0; }, true);
    auto r = verify_R8(W1(), zero, v, mp);
    double term = r.C_R * R * R * vr * vr;
    CHECK(r.C_R < 0.0);
    CHECK(term < 0.0);
    CHECK(std::abs(term) > std::abs(r.mass - r.potential));
    CHECK(r.r8_margin == rel(r.kinetic_plus + r.kinetic_minus + r.mass - r.potential - term));
    // jump off the grid
    auto off = poly_bump(log_grid(1e-6, 1e2, 256), 0.01, 0.05);
    CHECK_THROWS_AS(verify_R8(W1(), off, off, mp), GridError);
}

TEST_CASE("scaling demo") {
    auto g = log_grid(1e-6, 1e4, 256);
    auto v = poly_bump(g, 0.5, 2.0);
    std::vector<double> lams{1, 2, 4, 8, 16, 32, 64};
    auto one = scaling_demo(PotentialSpec::constant(1.0), v, lams);
    for (std::size_t i = 1; i < one.size(); ++i)
        CHECK(one[i - 1].grad_over_mass / one[i].grad_over_mass == rel(4.0).epsilon(0.05));
    auto lin = scaling_demo(PotentialSpec::custom("2s", [](double s) { return 2 * s; }), v, lams);
    CHECK(lin.back().margin < 0.0);
    auto w2 = scaling_demo(PotentialSpec::w2(), v, lams);
    for (const auto& r : w2) CHECK(r.margin >= 0.0);
}

TEST_CASE("R2 as the scaled limit of R1") {
    auto g = log_grid(1e-9, 1e3, 256);
    auto v = poly_bump(g, 0.5, 2.0);
    double r2 = r2_form(v);
    double r1 = 1e-3 * r1_form(dilate(v, 1e-3));
    CHECK(r1 == rel(r2).epsilon(0.01));
}

TEST_CASE("refinement consistency") {
    auto one = PotentialSpec::constant(1.0);
    auto rep = refine(
        [&](int ppd) {
            auto g = log_grid(1e-3, 10, ppd);
            return dirac_channel_form(one, Channel(1), poly_bump(g, 0.1, 2.0));
        },
        128, 3);
    auto& h = rep.refinement_history;
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(std::abs(h[i].second / h[i - 1].second - 1) < 1e-3);
}

TEST_CASE("bump corpus is seeded and Dirichlet") {
    auto g = log_grid(1e-6, 1e2, 64);
    auto a = bump_corpus(g, 20, 9), b = bump_corpus(g, 20, 9), c = bump_corpus(g, 20, 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].v == b[i].v);
        CHECK(a[i].v.front() == 0.0);
        CHECK(a[i].v.back() == 0.0);
        CHECK_NOTHROW(a[i].validate());
    }
    CHECK(a[0].v != c[0].v);
}

}
