#include "sigsas/readout.hpp"

#include <cmath>
#include <stdexcept>

#include "sigsas/simd.hpp"

namespace sigsas {

std::vector<double> Readout::apply(std::span<const double> state) const {
    if (state.size() != w.cols) throw std::invalid_argument("Readout: state dimension mismatch");
    std::vector<double> y(w.rows);
    simd::matvec(w.data.data(), w.rows, w.cols, state.data(), y.data());
    return y;
}

double Readout::norm() const { return operator_norm(w); }

const char* provenance_name(Readout::Provenance p) {
    switch (p) {
        case Readout::Provenance::analytic_exact: return "analytic_exact";
        case Readout::Provenance::analytic_transport: return "analytic_transport";
        case Readout::Provenance::least_squares: return "least_squares";
    }
    return "?";
}

double default_ridge(const Matrix& states) {
    if (states.cols == 0) return 0.0;
    double trace = 0.0;
    for (std::size_t t = 0; t < states.rows; ++t)
        trace += simd::sum_sq(states.row(t), states.cols);
    return 1e-8 * trace / static_cast<double>(states.cols);
}

Readout fit_readout(const Matrix& states, const Matrix& targets, double ridge) {
    if (states.rows != targets.rows)
        throw std::invalid_argument("fit_readout: states and targets must have equal length");
    if (states.rows < states.cols)
        throw std::invalid_argument("fit_readout: need at least dim(state) samples");
    if (ridge < 0.0) throw std::invalid_argument("fit_readout: ridge must be >= 0");

    const std::size_t k = states.cols;
    const std::size_t m = targets.cols;

    Matrix gram_x(k, k);
    simd::gram(states.data.data(), states.rows, k, gram_x.data.data());
    for (std::size_t i = 0; i < k; ++i) gram_x.at(i, i) += ridge;

    // X^T Y, k x m
    Matrix xty(k, m);
    for (std::size_t t = 0; t < states.rows; ++t) {
        const double* x = states.row(t);
        const double* y = targets.row(t);
        for (std::size_t i = 0; i < k; ++i) simd::axpy(x[i], y, xty.row(i), m);
    }

    if (!cholesky(gram_x)) {
        if (ridge == 0.0)
            throw std::runtime_error(
                "fit_readout: design matrix is singular to working precision and ridge is 0; "
                "pass a positive ridge to regularize");
        throw std::runtime_error("fit_readout: normal equations not positive definite");
    }
    Matrix wt(k, m);
    cholesky_solve(gram_x, xty, wt);

    Readout out;
    out.w = Matrix(m, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < m; ++j) out.w.at(j, i) = wt.at(i, j);
    out.ridge = ridge;
    out.provenance = Readout::Provenance::least_squares;
    return out;
}

}  // namespace sigsas
