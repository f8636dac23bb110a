#include "sigsas/simd.hpp"

#include <cmath>
#include <cstring>

namespace sigsas::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double sum_abs_scalar(const double* a, std::size_t n) {
    double s0 = 0, s1 = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        s0 += std::fabs(a[i]);
        s1 += std::fabs(a[i + 1]);
    }
    if (i < n) s0 += std::fabs(a[i]);
    return s0 + s1;
}

double sum_sq_scalar(const double* a, std::size_t n) { return dot_scalar(a, a, n); }

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void matvec_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                     double* y) {
    std::memset(y, 0, cols * sizeof(double));
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], a + r * cols, y, cols);
}

// G = A^T A by rank-1 accumulation, blocked over G rows so the working set of
// G stays cache resident while the A rows stream through.
void gram_scalar(const double* a, std::size_t rows, std::size_t cols, double* g) {
    std::memset(g, 0, cols * cols * sizeof(double));
    const std::size_t block = 128;
    for (std::size_t i0 = 0; i0 < cols; i0 += block) {
        const std::size_t i1 = (i0 + block < cols) ? i0 + block : cols;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = a + r * cols;
            for (std::size_t i = i0; i < i1; ++i) {
                axpy_scalar(row[i], row, g + i * cols, cols);
            }
        }
    }
}

void gemm_nt_scalar(const double* a, std::size_t m, const double* b, std::size_t p, std::size_t n,
                    double* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) c[i * p + j] = dot_scalar(a + i * n, b + j * n, n);
}

}  // namespace

namespace detail {

const Kernels& scalar_kernels() {
    static const Kernels k = {dot_scalar,    sum_abs_scalar,  sum_sq_scalar,
                              axpy_scalar,   scal_scalar,     matvec_scalar,
                              matvec_t_scalar, gram_scalar,   gemm_nt_scalar};
    return k;
}

}  // namespace detail
}  // namespace sigsas::simd
