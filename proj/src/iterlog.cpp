#include "hdl/iterlog.hpp"

#include <cmath>
#include <string>

#include "hdl/errors.hpp"

namespace hdl::iterlog {

double LogTowerParams::domain_end() const { return std::exp(a - 1.0); }

void LogTowerParams::validate() const {
    if (!(a > 1.0)) throw DomainError("a must exceed 1");
    if (!(trunc_tol > 0.0)) throw DomainError("trunc_tol must be positive");
    if (max_depth < 1) throw DomainError("max_depth must be at least 1");
}

namespace {

void check_s(double s, const LogTowerParams& p) {
    p.validate();
    if (!(s > 0.0) || !(std::log(s) < p.a - 1.0))
        throw DomainError("s outside (0, e^(a-1)): " + std::to_string(s));
}

void check_k(int k, const LogTowerParams& p) {
    if (k < 1) throw DepthError("depth must be >= 1");
    if (k > p.max_depth) throw DepthError("depth " + std::to_string(k) + " exceeds max_depth");
}

inline double step(double x, double a) { return 1.0 / (a - std::log(x)); }

} // namespace

double x1(double s, const LogTowerParams& p) {
    check_s(s, p);
    return 1.0 / (p.a - std::log(s));
}

double xk(double s, int k, const LogTowerParams& p) {
    check_k(k, p);
    double x = x1(s, p);
    for (int j = 1; j < k; ++j) x = step(x, p.a);
    return x;
}

TowerValue sigma_pi(double s, int k, const LogTowerParams& p) {
    check_k(k, p);
    TowerValue t{s, k, x1(s, p), 1.0, 0.0};
    for (int j = 1; j <= k; ++j) {
        if (j > 1) t.x = step(t.x, p.a);
        t.pi *= t.x;
        t.sigma += t.pi;
    }
    return t;
}

PartialTower partial_tower(double s, int k, const LogTowerParams& p) {
    check_k(k, p);
    PartialTower t;
    double x = x1(s, p), pi = 1.0, sigma = 0.0;
    for (int j = 1; j <= k; ++j) {
        if (j > 1) x = step(x, p.a);
        pi *= x;
        sigma += pi;
        t.x.push_back(x);
        t.pi.push_back(pi);
        t.sigma.push_back(sigma);
    }
    return t;
}

TowerSums tower_sums_from_x1(double x, const LogTowerParams& p) {
    p.validate();
    if (!(x > 0.0)) throw DomainError("X_1 value must be positive");
    TowerSums t;
    double pi = 1.0;
    for (int k = 1; k <= p.max_depth; ++k) {
        if (k > 1) x = step(x, p.a);
        pi *= x;
        t.cross += pi * t.sigma;
        t.sigma += pi;
        t.sum_pi2 += pi * pi;
        t.depth = k;
        if (pi * pi < p.trunc_tol * t.sum_pi2 && pi < p.trunc_tol * t.sigma) {
            t.sum_pi_sigma = t.cross + t.sum_pi2;
            return t;
        }
    }
    throw ConvergenceError("tower sum not converged within max_depth");
}

TowerSums tower_sums(double s, const LogTowerParams& p) { return tower_sums_from_x1(x1(s, p), p); }

double w_infinity(double s, const LogTowerParams& p) { return 1.0 + tower_sums(s, p).sum_pi2 / 8.0; }

double w_infinity_truncated(double s, int depth, const LogTowerParams& p) {
    auto t = partial_tower(s, depth, p);
    double acc = 0.0;
    for (double v : t.pi) acc += v * v;
    return 1.0 + acc / 8.0;
}

double nbar(double s, const LogTowerParams& p) { return 0.5 * tower_sums(s, p).sigma; }

double nbar_derivative(double s, const LogTowerParams& p) {
    return tower_sums(s, p).sum_pi_sigma / (2.0 * s);
}

} // namespace hdl::iterlog
