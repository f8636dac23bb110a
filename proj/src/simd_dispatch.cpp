#include "sigsas/simd.hpp"

#include <atomic>
#include <stdexcept>

namespace sigsas::simd {
namespace {

bool cpu_has_avx2() {
#if defined(SIGSAS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels* kernels_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &detail::scalar_kernels();
        case Backend::avx2:
#if defined(SIGSAS_HAVE_AVX2)
            return &detail::avx2_kernels();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::atomic<const Kernels*> g_kernels{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const Kernels& table() {
    const Kernels* k = g_kernels.load(std::memory_order_acquire);
    if (k) return *k;
    Backend best = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    g_backend.store(best, std::memory_order_relaxed);
    const Kernels* chosen = kernels_for(best);
    g_kernels.store(chosen, std::memory_order_release);
    return *chosen;
}

}  // namespace

bool available(Backend b) {
    if (b == Backend::scalar) return true;
    return cpu_has_avx2() && kernels_for(b) != nullptr;
}

Backend active() {
    table();
    return g_backend.load(std::memory_order_relaxed);
}

void use(Backend b) {
    if (!available(b)) throw std::invalid_argument("simd backend not available on this machine");
    g_backend.store(b, std::memory_order_relaxed);
    g_kernels.store(kernels_for(b), std::memory_order_release);
}

const char* name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::scalar};
    if (available(Backend::avx2)) out.push_back(Backend::avx2);
    return out;
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double sum_abs(const double* a, std::size_t n) { return table().sum_abs(a, n); }
double sum_sq(const double* a, std::size_t n) { return table().sum_sq(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }
void scal(double alpha, double* x, std::size_t n) { table().scal(alpha, x, n); }
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    table().matvec(a, rows, cols, x, y);
}
void matvec_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    table().matvec_t(a, rows, cols, x, y);
}
void gram(const double* a, std::size_t rows, std::size_t cols, double* g) {
    table().gram(a, rows, cols, g);
}
void gemm_nt(const double* a, std::size_t m, const double* b, std::size_t p, std::size_t n,
             double* c) {
    table().gemm_nt(a, m, b, p, n, c);
}

}  // namespace sigsas::simd
