#pragma once

#include <vector>

namespace hdl::iterlog {

struct LogTowerParams {
    double a = 5.0;
    double trunc_tol = 1e-14;
    int max_depth = 200;

    double domain_end() const;
    void validate() const;
};

struct TowerValue {
    double s = 0.0;
    int depth = 0;
    double x = 0.0;
    double pi = 0.0;
    double sigma = 0.0;
};

// Infinite tower sums, truncated by trunc_tol.
//   sigma        = sum_j pi_j
//   sum_pi2      = sum_j pi_j^2
//   cross        = sum_{i<j} pi_i pi_j  (= sum_j pi_j sigma_{j-1})
//   sum_pi_sigma = sum_j pi_j sigma_j   (= s * sigma'(s))
struct TowerSums {
    double sigma = 0.0;
    double sum_pi2 = 0.0;
    double cross = 0.0;
    double sum_pi_sigma = 0.0;
    int depth = 0;
};

double x1(double s, const LogTowerParams& p);
double xk(double s, int k, const LogTowerParams& p);
TowerValue sigma_pi(double s, int k, const LogTowerParams& p);

// All k levels at once: x[j], pi[j], sigma[j] for j = 0..k-1 (depth j+1).
struct PartialTower {
    std::vector<double> x, pi, sigma;
};
PartialTower partial_tower(double s, int k, const LogTowerParams& p);

TowerSums tower_sums(double s, const LogTowerParams& p);
// Same sums, started from a given value of X_1. Lets callers work at
// s below the smallest double by passing x = X_1(s) directly.
TowerSums tower_sums_from_x1(double x, const LogTowerParams& p);

double w_infinity(double s, const LogTowerParams& p);
double w_infinity_truncated(double s, int depth, const LogTowerParams& p);
double nbar(double s, const LogTowerParams& p);
// termwise product-rule derivative: sum_j pi_j sigma_j / (2 s)
double nbar_derivative(double s, const LogTowerParams& p);

} // namespace hdl::iterlog
