#pragma once

#include <cstddef>
#include <vector>

namespace hdl::tridiag {

// Symmetric pencil A x = lambda B x, A tridiagonal, B diagonal positive.
struct Pencil {
    std::vector<double> diag;  // size n
    std::vector<double> off;   // size n-1
    std::vector<double> mass;  // size n
};

// Jacobi-scaled matrix B^-1/2 A B^-1/2 (same layout, mass dropped)
Pencil scaled(const Pencil& p);

// number of eigenvalues strictly below lambda (scaled pencil)
std::size_t sturm_count(const Pencil& scaled_pencil, double lambda);

double smallest_eigenvalue_bisection(const Pencil& p, double rel_tol = 1e-15);

struct EigenResult {
    double value = 0.0;
    std::vector<double> vector;  // in the original variables
    int iterations = 0;
    bool converged = false;
};

// Inverse iteration on (C - shift) with Thomas solves. Stops when the Rayleigh
// quotient changes by less than tol (relative).
EigenResult inverse_iteration(const Pencil& p, double shift = 0.0, double tol = 1e-12, int max_iter = 200000,
                              std::vector<double> start = {});

// Bisection for the value, then inverse iteration shifted just below it.
EigenResult smallest_eigenpair(const Pencil& p, double tol = 1e-12);

} // namespace hdl::tridiag
