#pragma once

// Reduced random state-affine reservoirs: direct generation from the entry
// laws, explicit JL reduction of a SigSAS to matrix form, distributional
// audits, and the ESP probability certificate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigsas/jl.hpp"
#include "sigsas/linalg.hpp"
#include "sigsas/sigsas.hpp"
#include "sigsas/stats.hpp"

namespace sigsas {

struct RandomSasReservoir {
    enum class Construction { direct_law, jl_constructed };

    int k = 0;
    int p = 1;
    int l = 1;
    double M = 1.0;
    std::vector<int> i0;
    double delta = 0.0;   ///< failure budget; 0 for jl_constructed reservoirs
    double lambda = 0.0;  ///< state scale actually used in the A matrices
    std::uint64_t seed = 0;
    int sign = 1;         ///< Rademacher drive sign (jl_constructed); +1 for direct
    Construction construction = Construction::direct_law;
    /// lambda < 1/(m_tilde |||f|||^2) held for the generating map; always true
    /// for direct draws (no map attached).
    bool esp_condition_ok = true;

    std::vector<Matrix> a_mats;  ///< p+1 matrices, k x k
    Matrix b;                    ///< k x (p+1)

    double m_tilde() const;
    std::size_t n0() const;       ///< (p+1)^l
    std::size_t flat_dim() const; ///< (p+1)^{l+1}
};

/// lambda_0 = delta/(2 m_tilde) * sqrt(k / N0).
double lambda0_for(double delta, int k, std::size_t n0, double m_tilde);

/// Largest delta for which lambda_0 < min{1/m_tilde, 1} at these sizes.
double max_admissible_delta(int k, int p, int l, double m_bound);

/// Draws the reservoir from the exact entry laws: A_i entries
/// N(0, delta^2/(4 k m_tilde^2)), B columns N(0, 1/k) inside I0 and zero
/// outside. Rejects delta violating the lambda_0 condition, reporting the
/// maximal admissible delta.
RandomSasReservoir build_direct(int k, int p, int l, double m_bound, std::vector<int> i0,
                                double delta, std::uint64_t seed);

/// sum_i z^{i-1} A_i x + B (1, z, ..., z^p)^T. Rejects |z| > M.
std::vector<double> step_reduced(std::span<const double> x, double z,
                                 const RandomSasReservoir& r);

/// Assembles the reduced system of the JL-projected SigSAS in matrix form:
/// A_i = lambda S (Pi_l(S^T .) (x) e_i) via the block formula, B = sign S C^{I0}.
/// The reduced step then equals f o SigSAS-step o f* exactly.
RandomSasReservoir reduce_from_jl(const SigSasConfig& cfg, const JlMap& map, int sign);

struct LawAuditConfig {
    int k = 20;
    int p = 9;
    std::vector<int> l_schedule = {4};  ///< N0 = (p+1)^l per entry
    double m_bound = 0.5;
    double delta = 0.1;
    int trials = 200;            ///< reservoir draws per scheduled case
    int cells = 100;             ///< (i, j, m) positions under KS test
    double alpha = 0.01;         ///< KS rejection level
    int corr_pairs = 16;         ///< (A, B) entry pairs in the decorrelation audit
    int var_samples = 20000;     ///< samples of the unnormalized diagonal sum
    std::uint64_t seed = 1;
};

struct KsCell {
    int i = 1;  ///< 1-based matrix index within A_1..A_{p+1}
    int j = 0;  ///< 0-based row
    int m = 0;  ///< 0-based column
    double p_value = 1.0;
    bool rejected = false;
};

struct CorrCell {
    int i = 1;
    int j = 0;
    int m = 0;   ///< B column (0-based), inside I0
    double correlation = 0.0;
    double threshold = 0.0;
    bool ok = true;
};

struct LawAuditCase {
    int l = 0;
    std::size_t n0 = 0;
    double lambda0 = 0.0;
    double sigma_a = 0.0;  ///< target std of A entries delta/(2 sqrt(k) m_tilde)
    std::vector<KsCell> ks_cells;
    double ks_fraction_not_rejected = 0.0;
    std::vector<CorrCell> correlations;
    double max_abs_correlation = 0.0;
    bool correlations_ok = true;
    // unnormalized diagonal-sum variance, expected N0/k^2
    double var_measured = 0.0;
    double var_expected = 0.0;
    double var_rel_error = 0.0;
    bool b_outside_i0_zero = true;
};

struct LawAuditReport {
    LawAuditConfig config;
    std::vector<LawAuditCase> cases;
};

LawAuditReport law_audit(const LawAuditConfig& cfg);

struct EspCertificateConfig {
    int k = 50;
    int p = 3;
    int l = 3;
    double m_bound = 0.5;
    std::vector<int> i0;  ///< defaults to {1,...,p+1}
    double delta = 0.05;
    int trials = 1000;
    int grid_points = 1001;
    std::uint64_t seed = 1;
};

struct EspCertificate {
    EspCertificateConfig config;
    int failures = 0;              ///< draws with M_p >= 1
    double failure_rate = 0.0;
    double binomial_slack = 0.0;   ///< 3 sqrt(delta (1-delta) / trials)
    double certified_level = 0.0;  ///< delta + binomial_slack
    bool pass = false;
    double max_mp_seen = 0.0;
    double mean_mp = 0.0;
    /// grid estimates exceeding the triangle-inequality upper bound (should
    /// stay 0, the triangle bound is sound)
    int triangle_violations = 0;
};

/// Estimates M_p = sup_{|z|<=M} |||sum z^{i-1} A_i||| per draw by a dense grid
/// with golden-section refinement around the argmax, and audits the failure
/// fraction against delta plus three-sigma binomial slack.
EspCertificate esp_certificate(const EspCertificateConfig& cfg);

/// sup-norm estimate for one reservoir (grid + refinement), with the triangle
/// upper bound sum M^{i-1} |||A_i|||.
struct MpEstimate {
    double grid = 0.0;
    double refined = 0.0;
    double triangle_upper = 0.0;
    double argmax_z = 0.0;
};
MpEstimate estimate_mp(const RandomSasReservoir& r, int grid_points = 1001);

}  // namespace sigsas
