#include "sigsas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sigsas/simd.hpp"

namespace sigsas {

std::vector<double> apply(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.cols) throw std::invalid_argument("apply: dimension mismatch");
    std::vector<double> y(a.rows);
    simd::matvec(a.data.data(), a.rows, a.cols, x.data(), y.data());
    return y;
}

std::vector<double> apply_t(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.rows) throw std::invalid_argument("apply_t: dimension mismatch");
    std::vector<double> y(a.cols);
    simd::matvec_t(a.data.data(), a.rows, a.cols, x.data(), y.data());
    return y;
}

bool cholesky(Matrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("cholesky: square matrix required");
    const std::size_t n = a.rows;
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a.at(j, j)));
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j) - simd::sum_sq(a.row(j), j);
        // a pivot at rounding level of the diagonal scale means singular to
        // working precision
        if (!(d > 1e-13 * scale)) return false;
        d = std::sqrt(d);
        a.at(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            const double s = a.at(i, j) - simd::dot(a.row(i), a.row(j), j);
            a.at(i, j) = s / d;
        }
    }
    // zero the strict upper triangle, the factor is lower
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a.at(i, j) = 0.0;
    return true;
}

void cholesky_solve(const Matrix& chol, const Matrix& b, Matrix& x) {
    const std::size_t n = chol.rows;
    if (b.rows != n) throw std::invalid_argument("cholesky_solve: dimension mismatch");
    x = b;
    // forward substitution L y = b
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j)
            simd::axpy(-chol.at(i, j), x.row(j), x.row(i), x.cols);
        simd::scal(1.0 / chol.at(i, i), x.row(i), x.cols);
    }
    // back substitution L^T z = y
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j)
            simd::axpy(-chol.at(j, ii), x.row(j), x.row(ii), x.cols);
        simd::scal(1.0 / chol.at(ii, ii), x.row(ii), x.cols);
    }
}

std::vector<double> jacobi_eigenvalues(Matrix a, int max_sweeps) {
    if (a.rows != a.cols) throw std::invalid_argument("jacobi: square matrix required");
    const std::size_t n = a.rows;
    const double fro2 = simd::sum_sq(a.data.data(), a.data.size());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off <= 1e-28 * fro2) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double app = a.at(p, p), aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

SingularExtremes singular_extremes(const Matrix& a) {
    // Gram on the small side: A A^T if rows <= cols, else A^T A.
    const bool wide = a.rows <= a.cols;
    const std::size_t n = wide ? a.rows : a.cols;
    Matrix g(n, n);
    if (wide) {
        simd::gemm_nt(a.data.data(), a.rows, a.data.data(), a.rows, a.cols, g.data.data());
    } else {
        simd::gram(a.data.data(), a.rows, a.cols, g.data.data());
    }
    std::vector<double> ev = jacobi_eigenvalues(std::move(g));
    SingularExtremes out;
    out.smax = std::sqrt(std::max(0.0, ev.back()));
    out.smin = std::sqrt(std::max(0.0, ev.front()));
    return out;
}

double operator_norm(const Matrix& a) { return singular_extremes(a).smax; }

double operator_norm_power(const Matrix& a, double rel_tol, int max_iter, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(a.cols), av(a.rows), w(a.cols);
    for (auto& x : v) x = rng.gaussian();
    double nrm = std::sqrt(simd::sum_sq(v.data(), v.size()));
    simd::scal(1.0 / nrm, v.data(), v.size());
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        simd::matvec(a.data.data(), a.rows, a.cols, v.data(), av.data());
        simd::matvec_t(a.data.data(), a.rows, a.cols, av.data(), w.data());
        const double next = std::sqrt(simd::sum_sq(w.data(), w.size()));
        if (next == 0.0) return 0.0;
        simd::scal(1.0 / next, w.data(), w.size());
        v.swap(w);
        if (it > 0 && std::fabs(next - lambda) <= rel_tol * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(lambda);
}

}  // namespace sigsas
