#pragma once

// Small dense linear algebra on row-major matrices: just what the library
// needs (SPD solves for readout fitting, symmetric eigenvalues for operator
// norms, power iteration as the large-dimension fallback).

#include <cstddef>
#include <vector>

#include "sigsas/rng.hpp"

namespace sigsas {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// y = A x
std::vector<double> apply(const Matrix& a, const std::vector<double>& x);
/// y = A^T x
std::vector<double> apply_t(const Matrix& a, const std::vector<double>& x);

/// In-place lower Cholesky of an SPD matrix. Returns false on a non-positive
/// pivot (matrix not positive definite to working precision).
bool cholesky(Matrix& a);

/// Solves A X = B for SPD A using a Cholesky factor from cholesky().
/// B and X are row-major (n x m).
void cholesky_solve(const Matrix& chol, const Matrix& b, Matrix& x);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(Matrix a, int max_sweeps = 50);

/// Largest and smallest singular value of a row-major matrix, computed from
/// the eigenvalues of the small-side Gram matrix.
struct SingularExtremes {
    double smax = 0.0;
    double smin = 0.0;
};
SingularExtremes singular_extremes(const Matrix& a);

/// Operator (spectral) norm of a row-major matrix.
double operator_norm(const Matrix& a);

/// Largest eigenvalue of the Gram matrix A^T A via power iteration on
/// v -> A^T (A v); fallback path for dimensions where the dense Gram is
/// unreasonable. Returns smax(A).
double operator_norm_power(const Matrix& a, double rel_tol = 1e-10, int max_iter = 10000,
                           std::uint64_t seed = 1);

}  // namespace sigsas
