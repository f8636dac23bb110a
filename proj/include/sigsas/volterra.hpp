#pragma once

// Target filters with explicit finite Volterra kernels: truncated evaluation,
// the analytic truncation bound, and the exact readout construction over the
// tensor state space.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sigsas/readout.hpp"
#include "sigsas/sigsas.hpp"

namespace sigsas {

/// Finite-support Volterra kernels g_j(m_1,...,m_j), stored by ordered lag
/// tuple with lags in {-lag,...,0} and degrees in 1..degree. Symmetrization is
/// the evaluator's concern: a symmetric kernel is stored once per ordered
/// tuple and the evaluation sums them all.
class VolterraKernelSet {
public:
    VolterraKernelSet() = default;
    VolterraKernelSet(int degree, int lag, int m_out = 1);

    int degree() const { return degree_; }
    int lag() const { return lag_; }
    int m_out() const { return m_out_; }

    /// Sets the coefficient vector for one ordered lag tuple. Throws if the
    /// degree or any lag is out of range, or the value size is not m_out.
    void set(std::span<const int> lags, std::span<const double> value);
    void set(std::span<const int> lags, double value);

    /// Ordered map from (degree, lag tuple) to coefficients; iteration order
    /// is deterministic.
    const std::map<std::vector<int>, std::vector<double>>& entries() const { return entries_; }

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    /// Entries restricted to degree <= p and lags >= -l.
    VolterraKernelSet truncated(int p, int l) const;

    /// sum over entries with any lag <= -(l+1) of |g| M^degree; the tail mass
    /// dropped by lag truncation on inputs bounded by M.
    std::vector<double> tail_mass(int l, double m_bound) const;

private:
    int degree_ = 0;
    int lag_ = 0;
    int m_out_ = 1;
    std::map<std::vector<int>, std::vector<double>> entries_;
};

/// Truncated Volterra evaluation at index t of z_seq:
/// sum_j sum_{m_1..m_j} g_j(m_1,...,m_j) z_{m_1+t} ... z_{m_j+t}. Requires the
/// sequence to cover lags t-lag..t.
std::vector<double> eval_truncated(const VolterraKernelSet& kernels,
                                   std::span<const double> z_seq, std::size_t t);

/// Volterra truncation bound: wU_l + L (1 - s/M)^{-1} (s/M)^{p+1} for
/// s = sup-norm of the input. Throws if s >= M.
double truncation_bound(double m_bound, double l_bound, int p, double sup_norm_z, double wu_l);

/// The exact tensor-space readout: W with W * closed_form(window) equal to
/// eval_truncated(window) identically. Built by summing kernel coefficients
/// over the lag tuples matching each basis monomial, then composing with the
/// inverse of the monomial matrix. Throws if the kernel degree or lag exceeds
/// the configuration.
Readout readout_from_kernels(const VolterraKernelSet& kernels, const SigSasConfig& cfg,
                             int sign = 1);

/// A catalog target filter with explicit kernels and analytic tail bounds.
class TargetFilter {
public:
    enum class Kind { fir_linear, exponential_ma, quadratic_demo, custom_kernels };

    static TargetFilter exponential_ma(double a, double c, double m_bound);
    static TargetFilter fir_linear(double m_bound);
    static TargetFilter quadratic_demo(double m_bound);
    static TargetFilter custom(VolterraKernelSet kernels, double m_bound, std::string name);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double input_bound() const { return m_bound_; }
    /// Output bound L = sup over admissible inputs of |U(z)_t|.
    double output_bound() const { return l_bound_; }

    /// Exact kernels truncated to degree p and lag l.
    VolterraKernelSet kernels(int p, int l) const;
    /// Native (untruncated) kernels; infinite-lag kinds are materialized to
    /// the given horizon.
    const VolterraKernelSet& native_kernels() const { return kernels_; }

    /// Full filter value at index t, treating inputs before the start of
    /// z_seq as zero.
    std::vector<double> evaluate_full(std::span<const double> z_seq, std::size_t t) const;

    /// Forgetting sequence w^U at lag l: a monotone upper bound on the output
    /// change when inputs older than lag l are zeroed.
    double forgetting(int l) const;

    int output_dim() const { return kernels_.m_out(); }

private:
    Kind kind_ = Kind::custom_kernels;
    std::string name_;
    double m_bound_ = 1.0;
    double l_bound_ = 1.0;
    double exp_a_ = 0.5;  // exponential kind parameters
    double exp_c_ = 1.0;
    VolterraKernelSet kernels_;
};

/// Built-in catalog: exponential moving average, FIR linear, FIR quadratic.
std::vector<TargetFilter> builtin_filters();

/// Catalog lookup by name; throws on unknown names.
TargetFilter builtin_filter(const std::string& name);

}  // namespace sigsas
