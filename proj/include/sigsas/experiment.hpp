#pragma once

// End-to-end pipelines: the composite reduction experiment (JL map, reduced
// reservoir, analytic-transport and fitted readouts, bound audit) and the
// strong-universality demo.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigsas/jl.hpp"
#include "sigsas/random_sas.hpp"
#include "sigsas/readout.hpp"
#include "sigsas/volterra.hpp"

namespace sigsas {

/// Transported readout over the reduced space: Wbar(x) = W(S^T x).
Readout transport_readout(const Readout& w, const JlMap& map);

/// Inputs in the l1-constrained ball: i.i.d. uniform on [-theta M, theta M]
/// scaled by a summable envelope envelope_a^{(T-1-t)} anchored at the final
/// step, so the sequence is bounded by theta*M and lies in l1 by construction.
struct InputSpec {
    double theta = 0.5;
    double envelope_a = 0.9995;

    std::vector<double> generate(std::size_t length, double m_bound, std::uint64_t seed) const;
};

struct ExperimentConfig {
    std::string target = "exponential";  ///< builtin catalog name
    int p = 3;
    int l = 3;
    int k = 64;
    double delta = 0.18;
    double epsilon = 0.85;
    std::uint64_t seed = 1;
    int n_seeds = 1;
    int washout = 200;
    int horizon = 2000;
    InputSpec input;
    double ridge = -1.0;  ///< < 0 means the trace-scaled default
    int map_attempts = 10000;
};

struct BoundBreakdown {
    double w_term = 0.0;       ///< w^U_l
    double taylor_term = 0.0;  ///< L (1 - s/M)^{-1} (s/M)^{p+1}
    double ilp_sqrt = 0.0;     ///< |||W||| eps^{1/2} N^{3/4} Mt (1+f^2)^{1/2} / (1-(d/2)sqrt(k/N0))^2
    double ilp_linear = 0.0;   ///< |||W||| eps N Mt / (1-(d/2)sqrt(k/N0))^2

    double total_sqrt() const { return w_term + taylor_term + ilp_sqrt; }
    double total_linear() const { return w_term + taylor_term + ilp_linear; }
};

struct ReadoutTrajectory {
    std::string provenance;
    double max_error = 0.0;
    double mean_error = 0.0;
    std::size_t violations_sqrt = 0;    ///< steps with error > total_sqrt
    std::size_t violations_linear = 0;  ///< steps with error > total_linear
    double holdout_max_error = 0.0;
    double holdout_mean_error = 0.0;
    /// The fitted path has no tensor-space readout of its own; its bound
    /// reference is the analytic-transport W.
    bool ilp_applicable = true;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    int map_attempts = 0;
    double f_norm = 0.0;
    double lambda0 = 0.0;
    double w_norm = 0.0;  ///< |||W||| of the tensor-space analytic readout
    double sup_input = 0.0;
    BoundBreakdown bound;
    ReadoutTrajectory analytic;
    ReadoutTrajectory fitted;
    std::string reservoir_hash;
};

struct ExperimentReport {
    ExperimentConfig config;
    double m_bound = 0.0;
    double m_tilde = 0.0;
    std::size_t n = 0;
    std::size_t n0 = 0;
    std::vector<SeedOutcome> seeds;
    bool all_within_bounds = true;
    double runtime_ms = 0.0;  ///< lives apart from the reproducible payload
};

ExperimentReport run_reduction_experiment(const ExperimentConfig& cfg);

struct UniversalityRow {
    std::string target;
    double fitted_max_error = 0.0;
    double fitted_mean_error = 0.0;
    double analytic_max_error = 0.0;
    double bound_total_linear = 0.0;
    bool within_bound = true;
    std::string readout_hash;
    std::string reservoir_hash;
};

struct UniversalityReport {
    ExperimentConfig shared;  ///< target field unused
    std::vector<UniversalityRow> rows;
    bool shared_reservoir = true;  ///< one hash across all rows
    double runtime_ms = 0.0;
};

/// One reservoir, one state trajectory; per-target readouts fitted on the
/// same states.
UniversalityReport strong_universality_demo(const std::vector<std::string>& targets,
                                            const ExperimentConfig& shared);

/// FNV-1a hash of a reservoir's defining bytes, hex-encoded.
std::string reservoir_hash(const RandomSasReservoir& r);

}  // namespace sigsas
