#pragma once

// The signature state-affine system on T^{l+1}(R^{p+1}): one step of the
// recursion, driven runs, the closed-form solution of the filter, the diagonal
// monomial matrix, and empirical ESP diagnostics.

#include <cstdint>
#include <span>
#include <vector>

#include "sigsas/rng.hpp"
#include "sigsas/tensor.hpp"

namespace sigsas {

struct SigSasConfig {
    double M = 1.0;           ///< input bound, > 0
    int l = 1;                ///< memory lag, >= 1
    int p = 1;                ///< polynomial degree, >= 1
    double lambda = 0.1;      ///< state scale, 0 < lambda < min{1, 1/m_tilde()}
    std::vector<int> i0;      ///< drive index set, contains 1, size >= 2
    TensorShape shape;        ///< derived from (p, l)

    SigSasConfig() = default;
    SigSasConfig(double m, int l_, int p_, double lambda_, std::vector<int> i0_ = {});

    /// Sum form of (1 - M^{p+1})/(1 - M); finite at M = 1.
    double m_tilde() const;
    /// Contraction constant lambda * m_tilde(), < 1 by construction.
    double contraction() const;
    /// Invariant state-ball radius m_tilde() / (1 - contraction()).
    double state_bound() const;

    /// Largest admissible lambda for these (M, p): min{1, 1/m_tilde()}.
    static double max_lambda(double m, int p);
};

/// One step of the recursion: lambda * (order_lower(x) (x) vandermonde(z))
/// + sign * zhat0(z). Rejects |z| > M.
TensorState step(const TensorState& x, double z, const SigSasConfig& cfg, int sign = 1);

/// Iterated step; returns one state per input, oldest first.
std::vector<TensorState> run(std::span<const double> z_seq, const TensorState& x_init,
                             const SigSasConfig& cfg, int sign = 1);

/// Final state only (no trajectory storage).
TensorState run_final(std::span<const double> z_seq, const TensorState& x_init,
                      const SigSasConfig& cfg, int sign = 1);

/// The closed-form filter value from the last l+1 inputs of the window
/// (oldest first). Requires window length >= l+1; pre-window inputs are
/// treated as zero, which is exactly what the closed form assumes.
TensorState closed_form(std::span<const double> window, const SigSasConfig& cfg, int sign = 1);

/// The monomial transformation: a diagonal, invertible matrix A with
/// A * zhat(window) equal to the filter state identically in the input.
/// Construction verifies the residual identity on random windows and throws
/// if it fails.
struct MonomialMatrix {
    TensorShape shape;
    std::vector<double> diag;

    TensorState apply(const TensorState& v) const;
    TensorState apply_inverse(const TensorState& v) const;
    double min_diagonal() const;
    double max_diagonal() const;
};
MonomialMatrix monomial_matrix(const SigSasConfig& cfg, int sign = 1,
                               std::uint64_t check_seed = 0x5161a5u, int check_windows = 16,
                               double check_tol = 1e-9);

/// Empirical contraction / washout report against the Prop.-1 constants.
struct EspReport {
    double theoretical_bound = 0.0;   ///< lambda * m_tilde()
    double max_measured_factor = 0.0;
    double mean_measured_factor = 0.0;
    int trials = 0;
    int washout_steps_measured = 0;   ///< steps until state gap < washout_tol
    double washout_tol = 1e-10;
    double washout_gap_final = 0.0;
};
EspReport esp_diagnostic(const SigSasConfig& cfg, int trials, std::uint64_t seed = 7,
                         double washout_tol = 1e-10);

/// Random state in the closed ball of radius r (uniform direction, uniform
/// radius scaling); used by the diagnostics and tests.
TensorState random_state(const TensorShape& shape, double radius, Rng& rng);

}  // namespace sigsas
