#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <random>

#include "hdl/errors.hpp"
#include "hdl/iterlog.hpp"

using namespace hdl;
using namespace hdl::iterlog;

namespace {

// extended-precision reference tower
struct Ref {
    long double sigma = 0, sum_pi2 = 0;
};

long double ref_x1(long double s, long double a) { return 1.0L / (a - std::log(s)); }

long double ref_xk(long double s, int k, long double a) {
    long double x = ref_x1(s, a);
    for (int j = 1; j < k; ++j) x = ref_x1(x, a);
    return x;
}

Ref ref_sums(long double s, long double a, int depth = 60) {
    Ref r;
    long double x = ref_x1(s, a), pi = 1;
    for (int j = 0; j < depth; ++j) {
        if (j > 0) x = ref_x1(x, a);
        pi *= x;
        r.sigma += pi;
        r.sum_pi2 += pi * pi;
    }
    return r;
}

} // namespace

TEST_SUITE("iterlog") {

TEST_CASE("x1 closed values") {
    LogTowerParams p2;
    p2.a = 2;
    CHECK(x1(1.0, p2) == rel(0.5).epsilon(1e-15));
    double near = std::exp(1.0) * (1 - 1e-9);
    double v = x1(near, p2);
    CHECK(v < 1.0);
    CHECK(v > 1.0 - 1e-8);
    LogTowerParams p;
    CHECK(x1(0.1, p) == rel(double(ref_x1(0.1L, 5.0L))).epsilon(1e-15));
    CHECK(x1(0.1, p) == rel(0.1369379).epsilon(1e-6));
}

TEST_CASE("x1 rejects points outside the domain") {
    LogTowerParams p;
    CHECK_THROWS_AS(x1(0.0, p), DomainError);
    CHECK_THROWS_AS(x1(-1.0, p), DomainError);
    CHECK_THROWS_AS(x1(p.domain_end(), p), DomainError);
    CHECK(p.domain_end() == rel(std::exp(4.0)).epsilon(1e-15));
    LogTowerParams bad;
    bad.a = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("xk composition and depth limits") {
    LogTowerParams p;
    for (double s : {1e-9, 1e-3, 0.1, 1.0, 20.0}) CHECK(xk(s, 1, p) == x1(s, p));
    CHECK(xk(0.1, 2, p) == rel(double(ref_xk(0.1L, 2, 5.0L))).epsilon(1e-14));
    for (int k = 3; k <= 8; ++k) CHECK(xk(0.37, k, p) == rel(double(ref_xk(0.37L, k, 5.0L))).epsilon(1e-14));
    LogTowerParams shallow;
    shallow.max_depth = 3;
    CHECK_THROWS_AS(xk(0.1, 4, shallow), DepthError);
    CHECK_THROWS_AS(xk(0.1, 0, p), DepthError);
}

TEST_CASE("tower limit is independent of s") {
    LogTowerParams p;
    CHECK(std::abs(xk(0.1, 30, p) - xk(0.5, 30, p)) < 1e-8);
    double lim = xk(0.1, 30, p);
    CHECK(lim > 0.0);
    CHECK(lim < 1.0);
    // fixed point of x = 1/(a - log x)
    CHECK(lim == rel(1.0 / (5.0 - std::log(lim))).epsilon(1e-10));
}

TEST_CASE("sigma_pi running product and sum") {
    LogTowerParams p;
    auto t1 = sigma_pi(0.1, 1, p);
    CHECK(t1.pi == t1.x);
    CHECK(t1.sigma == t1.x);
    auto t2 = sigma_pi(0.1, 2, p);
    CHECK(t2.pi == rel(double(ref_x1(0.1L, 5) * ref_xk(0.1L, 2, 5))).epsilon(1e-14));
    for (int k = 2; k <= 10; ++k) {
        auto a = sigma_pi(0.02, k - 1, p), b = sigma_pi(0.02, k, p);
        CHECK(b.sigma == rel(a.sigma + b.pi).epsilon(1e-15));
        CHECK(b.pi < a.pi);
    }
}

TEST_CASE("property: tower values stay in (0, 1) and pi decreases") {
    LogTowerParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(std::log(1e-200), std::log(p.domain_end()) - 1e-6);
    std::uniform_int_distribution<int> K(2, 40);
    for (int i = 0; i < 500; ++i) {
        double s = std::exp(U(rng));
        int k = K(rng);
        auto t = partial_tower(s, k, p);
        for (int j = 0; j < k; ++j) {
            CHECK(t.x[j] > 0.0);
            CHECK(t.x[j] < 1.0);
            if (j > 0) CHECK(t.pi[j] < t.pi[j - 1]);
        }
    }
}

TEST_CASE("x1 satisfies s X1' = X1^2") {
    LogTowerParams p;
    for (double s : {1e-6, 1e-3, 0.05, 0.5, 5.0}) {
        double h = s * 1e-5;
        double d = s * (x1(s + h, p) - x1(s - h, p)) / (2 * h);
        double x = x1(s, p);
        CHECK(std::abs(d - x * x) < 1e-9);
    }
}

TEST_CASE("w_infinity against the extended-precision sum") {
    LogTowerParams p;
    for (double s : {1e-12, 1e-5, 0.01, 0.1, 1.0, 30.0}) {
        auto r = ref_sums(s, 5.0L);
        CHECK(w_infinity(s, p) == rel(double(1 + r.sum_pi2 / 8)).epsilon(1e-14));
        CHECK(nbar(s, p) == rel(double(r.sigma / 2)).epsilon(1e-13));
    }
    auto tiny = ref_sums(1e-300L, 5.0L);
    CHECK(w_infinity(1e-300, p) == rel(double(1 + tiny.sum_pi2 / 8)).epsilon(1e-15));
    CHECK(w_infinity(1e-300, p) > 1.0);
}

TEST_CASE("w_infinity nondecreasing near zero") {
    LogTowerParams p;
    auto g = std::vector<double>{};
    double prev = 0.0;
    for (double ls = -200; ls < -1; ls += 0.25) {
        double w = w_infinity(std::exp(ls), p);
        CHECK(w >= prev);
        prev = w;
    }
}

TEST_CASE("truncation soundness") {
    LogTowerParams p;
    for (double s : {1e-8, 0.01, 0.5}) {
        auto t = tower_sums(s, p);
        double a = w_infinity_truncated(s, t.depth, p), b = w_infinity_truncated(s, t.depth + 2, p);
        CHECK(std::abs(a - b) <= 10 * p.trunc_tol * b);
        CHECK(w_infinity(s, p) == rel(a).epsilon(1e-15));
    }
}

TEST_CASE("nbar bounds and limits") {
    LogTowerParams p;
    CHECK(nbar(1e-300, p) < 2e-3);
    for (double s : {1e-10, 1e-4, 0.3, 10.0}) CHECK(nbar(s, p) >= 0.5 * x1(s, p));
}

TEST_CASE("s nbar' = nbar^2 + 2 (W_inf - 1) with finite-difference derivative") {
    LogTowerParams p;
    double s = 0.05, h = s * 1e-5;
    double d = (nbar(s + h, p) - nbar(s - h, p)) / (2 * h);
    double n = nbar(s, p);
    CHECK(std::abs(s * d - n * n - 2 * (w_infinity(s, p) - 1)) < 1e-6);
}

TEST_CASE("termwise derivative matches finite differences") {
    LogTowerParams p;
    for (double s : {1e-6, 1e-3, 0.05, 1.0}) {
        double h = s * 1e-5;
        double d = (nbar(s + h, p) - nbar(s - h, p)) / (2 * h);
        CHECK(nbar_derivative(s, p) == rel(d).epsilon(1e-8));
    }
}

TEST_CASE("identity 2 s sigma_k' - sigma_k^2 = sum pi_j^2") {
    LogTowerParams p;
    for (int k = 1; k <= 6; ++k)
        for (double s : {1e-7, 1e-4, 0.01, 0.2, 2.0}) {
            double h = s * 1e-5;
            double d = (sigma_pi(s + h, k, p).sigma - sigma_pi(s - h, k, p).sigma) / (2 * h);
            auto t = partial_tower(s, k, p);
            double sp2 = 0;
            for (double v : t.pi) sp2 += v * v;
            double lhs = 2 * s * d - t.sigma[k - 1] * t.sigma[k - 1];
            CHECK(std::abs(lhs - sp2) <= 1e-5 * sp2);
        }
}

}
