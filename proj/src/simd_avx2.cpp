// AVX2/FMA variants of the arithmetic kernels. Compiled with -mavx2 -mfma and
// only dispatched to after a runtime CPU check, so the rest of the library
// stays runnable on plain x86-64.

#if defined(SIGSAS_HAVE_AVX2)

#include <immintrin.h>

#include <cstring>

#include "sigsas/simd.hpp"

namespace sigsas::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_abs_avx2(const double* a, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_and_pd(mask, _mm256_loadu_pd(a + i + 4)));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] < 0 ? -a[i] : a[i];
    return s;
}

double sum_sq_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void matvec_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void matvec_t_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
    std::memset(y, 0, cols * sizeof(double));
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], a + r * cols, y, cols);
}

void gram_avx2(const double* a, std::size_t rows, std::size_t cols, double* g) {
    std::memset(g, 0, cols * cols * sizeof(double));
    const std::size_t block = 128;
    for (std::size_t i0 = 0; i0 < cols; i0 += block) {
        const std::size_t i1 = (i0 + block < cols) ? i0 + block : cols;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = a + r * cols;
            for (std::size_t i = i0; i < i1; ++i) {
                axpy_avx2(row[i], row, g + i * cols, cols);
            }
        }
    }
}

void gemm_nt_avx2(const double* a, std::size_t m, const double* b, std::size_t p, std::size_t n,
                  double* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) c[i * p + j] = dot_avx2(a + i * n, b + j * n, n);
}

}  // namespace

namespace detail {

const Kernels& avx2_kernels() {
    static const Kernels k = {dot_avx2,    sum_abs_avx2,  sum_sq_avx2,
                              axpy_avx2,   scal_avx2,     matvec_avx2,
                              matvec_t_avx2, gram_avx2,   gemm_nt_avx2};
    return k;
}

}  // namespace detail
}  // namespace sigsas::simd

#endif  // SIGSAS_HAVE_AVX2
