#pragma once

// Linear readouts over tensor or reduced state spaces, and their provenance.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigsas/linalg.hpp"

namespace sigsas {

struct Readout {
    enum class Provenance { analytic_exact, analytic_transport, least_squares };

    Matrix w;                 ///< m_out x dim
    double ridge = 0.0;       ///< penalty used when fitted, else 0
    Provenance provenance = Provenance::analytic_exact;

    std::size_t output_dim() const { return w.rows; }
    std::size_t state_dim() const { return w.cols; }

    std::vector<double> apply(std::span<const double> state) const;

    /// Spectral norm of the readout matrix.
    double norm() const;
};

const char* provenance_name(Readout::Provenance p);

/// Ridge least squares over a sequence of states (rows of `states`) and
/// targets (rows of `targets`): minimizes sum ||W x_t - y_t||^2 + ridge||W||^2
/// by the normal equations with a symmetric solve. With ridge = 0 a design
/// matrix that is singular to working precision is reported via
/// std::runtime_error, never silently regularized.
Readout fit_readout(const Matrix& states, const Matrix& targets, double ridge);

/// Conditioning-guard default: 1e-8 * trace(X^T X) / dim.
double default_ridge(const Matrix& states);

}  // namespace sigsas
