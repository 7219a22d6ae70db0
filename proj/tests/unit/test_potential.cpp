#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <random>

#include "hdl/errors.hpp"
#include "hdl/grid.hpp"
#include "hdl/potential.hpp"

using namespace hdl;
using namespace hdl::potential;

namespace {

const LogTowerParams P{};

const PotentialSpec& W1() {
    static const PotentialSpec w = PotentialSpec::w1(P);
    return w;
}
const PotentialSpec& W2() {
    static const PotentialSpec w = PotentialSpec::w2();
    return w;
}
const PotentialSpec& W3() {
    static const PotentialSpec w = PotentialSpec::make_w3(P);
    return w;
}

} // namespace

TEST_SUITE("potential_lab") {

TEST_CASE("generator: multiplier one gives one") {
    for (double s : {1e-6, 0.3, 1.0, 7.0, 1e3}) {
        CHECK(w_pm(1.0, 0.0, s, Sign::Plus) == rel(1.0).epsilon(1e-15));
        CHECK(w_pm(1.0, 0.0, s, Sign::Minus) == rel(1.0).epsilon(1e-15));
    }
}

TEST_CASE("generator: constant multiplier") {
    double c = 0.5, s = 2.0;
    CHECK(w_pm(c, 0.0, s, Sign::Plus) == rel((2 * c + s * (1 - c * c)) / (1 + c * c)));
    CHECK(w_pm(c, 0.0, s, Sign::Plus) == rel(2.0));
}

TEST_CASE("generator: m = 1/(4s)") {
    for (double s : {0.2, 1.0, 3.0, 50.0}) {
        double plus = (s + 3.0 / (16 * s)) / (1 + 1.0 / (16 * s * s));
        double minus = (s + 11.0 / (16 * s)) / (1 + 1.0 / (16 * s * s));
        CHECK(w_quarter(s, Sign::Plus) == rel(plus).epsilon(1e-14));
        CHECK(w_quarter(s, Sign::Minus) == rel(minus).epsilon(1e-14));
    }
    double s = 1e3;
    CHECK(std::abs(w_quarter(s, Sign::Plus) - (s + 1.0 / (8 * s))) < 1e-8);
}

TEST_CASE("property: sign symmetry of the generator") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0), S(1e-3, 20.0);
    for (int i = 0; i < 1000; ++i) {
        double n = U(rng), dn = U(rng), s = S(rng);
        // minus channel with m' equals plus channel with -m'
        CHECK(w_pm(1 - n, -dn, s, Sign::Minus) == rel(w_pm(1 - n, dn, s, Sign::Plus)).epsilon(1e-13));
        double m = 1 + n;
        double direct = (2 * m + s * dn - s * m * m + s) / (1 + m * m);
        CHECK(w_pm(m, dn, s, Sign::Plus) == rel(direct).epsilon(1e-13));
    }
    CHECK_THROWS_AS(w_pm(NAN, 0, 1, Sign::Plus), DomainError);
}

TEST_CASE("admissibility: equality cases") {
    auto g = log_grid(1e-6, 1e2, 32);
    auto one = PotentialSpec::constant(1.0);
    auto rep = admissible(MultiplierPair::constant(1, 1), one, g);
    CHECK(rep.passed);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(rep.margin_plus[i]) < 1e-13);
        CHECK(std::abs(rep.margin_minus[i]) < 1e-13);
    }
    double nu = 0.6, m = (1 - std::sqrt(1 - nu * nu)) / nu;
    CHECK(m == rel(1.0 / 3.0));
    auto W = PotentialSpec::custom("const-m", [m](double s) { return w_pm(m, 0, s, Sign::Plus); });
    auto r2 = admissible(MultiplierPair::constant(m, m), W, g);
    CHECK(r2.passed);
    CHECK(std::abs(r2.min_margin) < 1e-12);
}

TEST_CASE("admissibility of the three constructions") {
    auto g = log_grid(1e-6, 1e2, 256);
    for (const auto* W : {&W1(), &W2(), &W3()}) {
        auto rep = admissible(*W->multipliers(), *W, g);
        CAPTURE(W->name());
        CHECK(rep.passed);
        CHECK(rep.min_margin >= -1e-9);
    }
    auto r = W1().radii()->plus;
    auto g1 = log_grid(1e-8, r * 0.999, 64);
    CHECK(admissible(*W1().multipliers(), W1(), g1).min_margin >= -1e-12);
}

TEST_CASE("admissibility rejects bad grids") {
    std::vector<double> g{1.0, 0.5};
    CHECK_THROWS_AS(admissible(MultiplierPair::constant(1, 1), PotentialSpec::constant(), g), GridError);
}

TEST_CASE("threshold T") {
    double T = find_T();
    CHECK(std::abs(T - 0.866876) < 1e-5);
    CHECK(std::abs(threshold_closed_form() - T) < 1e-10);
    CHECK(std::abs(std::min(w_quarter(T, Sign::Plus), w_quarter(T, Sign::Minus)) - 1.0) < 1e-8);
    // root of the quartic behind the closed form: plus channel equals one
    CHECK(std::abs(w_quarter(T, Sign::Plus) - 1.0) < 1e-12);
}

TEST_CASE("eval_potential values") {
    auto one = PotentialSpec::constant(1.0);
    CHECK(eval_potential(one, 0.123) == 1.0);
    CHECK(std::abs(eval_potential(W2(), 10.0) - 10.0125) < 1e-3);
    CHECK_THROWS_AS(eval_potential(one, 0.0), DomainError);
    double prev = INFINITY;
    for (double s : {1e-3, 1e-4, 1e-5, 1e-6}) {
        double d = std::abs(eval_potential(W1(), s) - iterlog::w_infinity(s, P));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("W3 without ODE solutions") {
    auto w = PotentialSpec::w3(P, nullptr, nullptr);
    CHECK_THROWS_AS(w(0.5), MissingDependencyError);
}

TEST_CASE("constructions stay above one and grow like s") {
    auto g = log_grid(1e-8, 1e4, 64);
    for (const auto* W : {&W1(), &W2(), &W3()})
        for (double s : g) CHECK((*W)(s) >= 1.0 - 1e-12);
    for (const auto* W : {&W2(), &W3()}) {
        CHECK(std::abs((*W)(100.0) / 100.0 - 1.0) < 1e-3);
        for (double s : log_grid(100, 1e5, 8)) CHECK(std::abs((*W)(s) / s - 1.0) < 2.0 / (8 * s * s) + 1e-6);
    }
}

TEST_CASE("break radii") {
    auto r2 = break_radii(W2());
    CHECK(std::abs(w_quarter(r2.plus, Sign::Plus) - 1) < 1e-10);
    CHECK(std::abs(w_quarter(r2.minus, Sign::Minus) - 1) < 1e-10);
    CHECK(std::abs(std::max(r2.plus, r2.minus) - find_T()) < 1e-8);
    auto r1 = break_radii(W1());
    CHECK(r1.plus > 0.0);
    CHECK(r1.plus < 1.0);
    CHECK(r1.minus > 0.0);
    CHECK(r1.minus < 1.0);
    CHECK(std::abs(w_bar_channel(r1.plus, Sign::Plus, P) - 1) < 1e-9);
    CHECK(r1.plus == W1().radii()->plus);
    CHECK_THROWS_AS(break_radii(PotentialSpec::constant()), DomainError);
}

TEST_CASE("jumps and the surface constant") {
    auto mp = *W3().multipliers();
    double R = W3().radii()->plus;
    CHECK(mp.m_right(Sign::Plus, R) - mp.m(Sign::Plus, R) == rel(mp.jumps_plus[0].size).epsilon(1e-6));
    CHECK(mp.surface_constant() < 0.0);
    CHECK(mp.surface_constant() == rel(-std::max(mp.jumps_minus[0].size, -mp.jumps_plus[0].size)));
    auto m1 = *W1().multipliers();
    CHECK(m1.jumps_plus[0].size < 0.0);
    CHECK(m1.surface_constant() < 0.0);
    CHECK(MultiplierPair::constant(1, 1).surface_constant() == 0.0);
}

TEST_CASE("Wbar asymptotics against the tower") {
    auto wb = PotentialSpec::w_bar(P);
    for (int k = 1; k <= 3; ++k)
        for (double s : {1e-3, 1e-5, 1e-8}) {
            auto t = iterlog::partial_tower(s, k + 1, P);
            double sm = 0;
            for (int j = 0; j < k; ++j) sm += t.pi[j] * t.pi[j];
            double q = (wb(s) - 1 - sm / 8) / (t.pi[k] * t.pi[k]);
            CHECK(q <= 0.125 + 0.05);
        }
}

TEST_CASE("Riccati blow-up demo") {
    auto one = PotentialSpec::constant(1.0);
    auto tr = blowup_demo(one, 0.01, 1.0, 50.0);
    CHECK_FALSE(tr.blew_up);
    for (double m : tr.m) CHECK(m == rel(1.0).epsilon(1e-12));

    auto ode = singular_ode::solve(1e-2, 0.5, 1e-10, P);
    double s0 = 5e-3;
    auto t1 = blowup_demo(W1(), s0, ode.m_at(s0));
    CHECK(t1.blew_up);
    REQUIRE(t1.escape_radius);
    CHECK(*t1.escape_radius > s0);

    auto t2 = blowup_demo(W2(), 0.05, 1.2, 20.0);
    for (std::size_t i = 1; i < t2.m.size(); ++i) CHECK(t2.m[i] >= t2.m[i - 1] - 1e-12);
}

}
