#pragma once

// Johnson-Lindenstrauss maps: sampling, the dimension condition, distance
// audits, Q-norms, quasi-projection gaps, and projection of contractive
// state dynamics with the certified error bounds.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sigsas/linalg.hpp"
#include "sigsas/rng.hpp"

namespace sigsas {

struct JlMap {
    std::size_t rows = 0;  ///< k
    std::size_t cols = 0;  ///< N, with k <= N (the map is a reduction)
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    Matrix s;  ///< k x N, entries N(0, 1/k)

    std::vector<double> apply(std::span<const double> v) const;          ///< f(v) = S v
    std::vector<double> apply_adjoint(std::span<const double> y) const;  ///< f*(y) = S^T y
};

/// Entries i.i.d. N(0, 1/k), reproducible from the seed. Throws if k < 1 or
/// k > N.
JlMap sample_jl(std::size_t n, std::size_t k, std::uint64_t seed, double epsilon);

/// Smallest k with k >= 24 ln(n) / (3 eps^2 - 2 eps^3).
std::size_t min_dimension(std::size_t n, double epsilon);

/// Largest and smallest singular values of S (dense Gram on the small side).
SingularExtremes jl_singular_extremes(const JlMap& map);

/// Operator norm of the map; SVD route for flat dimensions up to 1e4, power
/// iteration beyond that.
double jl_operator_norm(const JlMap& map);

/// Numerical surjectivity: smallest singular value > 1e-10 * largest.
bool jl_surjective(const JlMap& map);

struct DistanceReport {
    bool pass = true;
    double worst_ratio = 1.0;  ///< squared-distance ratio farthest from 1
    std::size_t pairs_checked = 0;
    std::size_t violations = 0;
};

/// Audits (1-eps)||v1-v2||^2 <= ||f(v1)-f(v2)||^2 <= (1+eps)||v1-v2||^2 over
/// all pairs of the given points.
DistanceReport check_distances(const JlMap& map, std::span<const std::vector<double>> points,
                               double epsilon);

/// Same audit specialized to Q = {+-e_1, ..., +-e_N}, computed from the
/// column Gram of S.
DistanceReport check_pm_basis_distances(const JlMap& map, double epsilon);

struct ResampledJl {
    JlMap map;
    int attempts = 0;
};

/// Resamples until the +-basis distance audit and the surjectivity check both
/// pass; throws after max_attempts.
ResampledJl sample_jl_to_pass(std::size_t n, std::size_t k, double epsilon, std::uint64_t seed,
                              int max_attempts = 100000);

/// Q-norm for Q = +-canonical basis: the l1 norm.
double q_norm_pm_basis(std::span<const double> v);

/// Q-norm for a general finite symmetric atom set, by linear programming:
/// min sum |lambda_j| subject to sum lambda_j q_j = v. Throws if v is not in
/// span(Q). Small dense simplex; intended for desk-scale Q only.
double q_norm(std::span<const double> v, std::span<const std::vector<double>> q_atoms);

struct QuasiProjectionReport {
    double gap = 0.0;              ///< ||(I - f* f) v||
    double certified_bound = 0.0;  ///< eps sqrt(N) ||v||_1
    bool within = true;
};

/// The quasi-projection defect of v under the map, with the certified bound
/// that holds whenever the map passed the +-basis distance audit.
QuasiProjectionReport quasi_projection_gap(const JlMap& map, std::span<const double> v);

enum class BoundVariant {
    general_sqrt,    ///< eps^{1/2} C M_Q C_Q (1+|||f|||^2)^{1/2} / (1-rho)
    general_linear,  ///< eps C M_Q^2 C_Q^2 / (1-rho)
    pm_basis_sqrt,   ///< eps^{1/2} N^{3/4} C (1+|||f|||^2)^{1/2} R|||f|||^2/(R|||f|||^2-1)
    pm_basis_linear  ///< eps N C R|||f|||^2/(R|||f|||^2-1)
};

struct BoundParams {
    double c = 0.0;       ///< state-ball radius of the base system
    double m_q = 1.0;     ///< sup norm over Q
    double c_q = 0.0;     ///< smallest c with ||.||_Q <= c ||.||
    double epsilon = 0.0;
    double rho = 0.0;     ///< base contraction constant
    double f_norm = 0.0;  ///< |||f|||
    std::size_t n = 0;    ///< ambient dimension N
};

/// Uniform-in-time bound on ||U_rho(z)_t - (JL-projected filter)(z)_t|| for the
/// selected variant. The pm-basis variants require rho = 1/(R |||f|||^2) and
/// recover R from rho and f_norm.
double projection_error_bound(BoundVariant variant, const BoundParams& p);

/// A contractive state system together with its JL-projected versions. The
/// base step maps (state in R^N, scalar input) to R^N.
class ProjectedSystem {
public:
    using StepFn = std::function<std::vector<double>(std::span<const double>, double)>;

    /// Throws if rho * |||f|||^2 >= 1 (the projected ESP condition), with the
    /// measured norm in the diagnostic.
    ProjectedSystem(StepFn base_step, JlMap map, double rho, double base_affine_bound);

    /// F^f(x, z) = f(base(f*(x), z)), states in R^k.
    std::vector<double> reduced_step(std::span<const double> x, double z) const;

    /// The V_k-valued version: v -> f*(f(base(v, z))), states in R^N.
    std::vector<double> vk_step(std::span<const double> v, double z) const;

    const JlMap& map() const { return map_; }
    double rho() const { return rho_; }
    double f_norm() const { return f_norm_; }
    double reduced_contraction() const { return rho_ * f_norm_ * f_norm_; }
    /// Invariant-ball radius of the reduced system.
    double reduced_radius() const;

private:
    StepFn base_;
    JlMap map_;
    double rho_ = 0.0;
    double f_norm_ = 0.0;
    double base_affine_bound_ = 0.0;
};

}  // namespace sigsas
