#pragma once

// Data-parallel kernels used by the dense linear algebra throughout the
// library. Every kernel has a scalar reference implementation and, on x86-64
// with AVX2/FMA, a vectorized variant selected at runtime. The two variants
// are equivalence-tested against each other (summation order differs, so
// reductions agree to rounding, not bit-exactly).

#include <cstddef>
#include <string>
#include <vector>

namespace sigsas::simd {

enum class Backend { scalar, avx2 };

/// True if the backend is compiled in and supported by this CPU.
bool available(Backend b);

/// Currently active backend (auto-detected on first use).
Backend active();

/// Force a backend, e.g. for equivalence tests. Throws if unavailable.
void use(Backend b);

const char* name(Backend b);

/// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();

double dot(const double* a, const double* b, std::size_t n);
double sum_abs(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
/// x *= alpha
void scal(double alpha, double* x, std::size_t n);

/// y = A x with A row-major (rows x cols).
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
/// y = A^T x with A row-major (rows x cols); y has length cols.
void matvec_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// G = A^T A with A row-major (rows x cols); G is cols x cols, row-major.
void gram(const double* a, std::size_t rows, std::size_t cols, double* g);

/// C = A B^T with A (m x n), B (p x n), C (m x p), all row-major.
void gemm_nt(const double* a, std::size_t m, const double* b, std::size_t p, std::size_t n,
             double* c);

/// Kernel function table; one instance per backend.
struct Kernels {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_abs)(const double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scal)(double, double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*matvec_t)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*gram)(const double*, std::size_t, std::size_t, double*);
    void (*gemm_nt)(const double*, std::size_t, const double*, std::size_t, std::size_t, double*);
};

namespace detail {
const Kernels& scalar_kernels();
#if defined(SIGSAS_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
}  // namespace detail

}  // namespace sigsas::simd
