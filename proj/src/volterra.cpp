#include "sigsas/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sigsas {

VolterraKernelSet::VolterraKernelSet(int degree, int lag, int m_out)
    : degree_(degree), lag_(lag), m_out_(m_out) {
    if (degree < 1) throw std::invalid_argument("VolterraKernelSet: degree must be >= 1");
    if (lag < 0) throw std::invalid_argument("VolterraKernelSet: lag must be >= 0");
    if (m_out < 1) throw std::invalid_argument("VolterraKernelSet: m_out must be >= 1");
}

void VolterraKernelSet::set(std::span<const int> lags, std::span<const double> value) {
    const int j = static_cast<int>(lags.size());
    if (j < 1 || j > degree_)
        throw std::invalid_argument("VolterraKernelSet: tuple degree out of range 1.." +
                                    std::to_string(degree_));
    for (int m : lags)
        if (m < -lag_ || m > 0)
            throw std::invalid_argument("VolterraKernelSet: lag out of range -" +
                                        std::to_string(lag_) + "..0");
    if (value.size() != static_cast<std::size_t>(m_out_))
        throw std::invalid_argument("VolterraKernelSet: value size must equal m_out");
    entries_[std::vector<int>(lags.begin(), lags.end())] =
        std::vector<double>(value.begin(), value.end());
}

void VolterraKernelSet::set(std::span<const int> lags, double value) {
    set(lags, std::span<const double>(&value, 1));
}

VolterraKernelSet VolterraKernelSet::truncated(int p, int l) const {
    VolterraKernelSet out(std::min(p, degree_), std::min(l, lag_), m_out_);
    for (const auto& [lags, value] : entries_) {
        if (static_cast<int>(lags.size()) > p) continue;
        if (std::any_of(lags.begin(), lags.end(), [l](int m) { return m < -l; })) continue;
        out.set(lags, value);
    }
    return out;
}

std::vector<double> VolterraKernelSet::tail_mass(int l, double m_bound) const {
    std::vector<double> mass(static_cast<std::size_t>(m_out_), 0.0);
    for (const auto& [lags, value] : entries_) {
        if (std::none_of(lags.begin(), lags.end(), [l](int m) { return m < -l; })) continue;
        const double scale = std::pow(m_bound, static_cast<double>(lags.size()));
        for (int r = 0; r < m_out_; ++r)
            mass[static_cast<std::size_t>(r)] += std::fabs(value[static_cast<std::size_t>(r)]) * scale;
    }
    return mass;
}

std::vector<double> eval_truncated(const VolterraKernelSet& kernels,
                                   std::span<const double> z_seq, std::size_t t) {
    if (t >= z_seq.size()) throw std::invalid_argument("eval_truncated: index out of range");
    if (t + 1 < static_cast<std::size_t>(kernels.lag()) + 1)
        throw std::invalid_argument("eval_truncated: insufficient history for lag " +
                                    std::to_string(kernels.lag()));
    std::vector<double> y(static_cast<std::size_t>(kernels.m_out()), 0.0);
    for (const auto& [lags, value] : kernels.entries()) {
        double prod = 1.0;
        for (int m : lags)
            prod *= z_seq[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + m)];
        for (std::size_t r = 0; r < y.size(); ++r) y[r] += prod * value[r];
    }
    return y;
}

double truncation_bound(double m_bound, double l_bound, int p, double sup_norm_z, double wu_l) {
    if (!(sup_norm_z < m_bound))
        throw std::invalid_argument("truncation_bound: requires ||z||_inf < M strictly");
    if (sup_norm_z < 0) throw std::invalid_argument("truncation_bound: negative sup norm");
    const double ratio = sup_norm_z / m_bound;
    return wu_l + l_bound * std::pow(ratio, p + 1) / (1.0 - ratio);
}

Readout readout_from_kernels(const VolterraKernelSet& kernels, const SigSasConfig& cfg,
                             int sign) {
    if (kernels.degree() > cfg.p)
        throw std::invalid_argument("readout_from_kernels: kernel degree exceeds p");
    if (kernels.lag() > cfg.l)
        throw std::invalid_argument("readout_from_kernels: kernel lag exceeds l");

    const std::size_t n = cfg.shape.flat_dim;
    const std::size_t m = static_cast<std::size_t>(kernels.m_out());

    // (W A) column at a multi-index is the sum of kernel coefficients over the
    // ordered lag tuples whose monomial matches that multi-index.
    Matrix wa(m, n);
    std::vector<int> multi(static_cast<std::size_t>(cfg.l) + 1);
    for (const auto& [lags, value] : kernels.entries()) {
        std::fill(multi.begin(), multi.end(), 1);
        for (int lag : lags) {
            // lag m contributes one power of z_{t+m}, living in slot l+1+m
            auto& slot = multi[static_cast<std::size_t>(cfg.l + lag)];
            slot += 1;
            if (slot > cfg.shape.base_dim)
                throw std::invalid_argument(
                    "readout_from_kernels: kernel monomial exceeds per-variable degree p");
        }
        const std::size_t flat = lex_index(multi, cfg.shape);
        for (std::size_t r = 0; r < m; ++r) wa.at(r, flat) += value[r];
    }

    const MonomialMatrix a = monomial_matrix(cfg, sign);
    Readout out;
    out.w = Matrix(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < n; ++i) out.w.at(r, i) = wa.at(r, i) / a.diag[i];
    out.provenance = Readout::Provenance::analytic_exact;
    return out;
}

TargetFilter TargetFilter::exponential_ma(double a, double c, double m_bound) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("exponential_ma: need 0 < a < 1");
    if (m_bound <= 0.0) throw std::invalid_argument("exponential_ma: need M > 0");
    TargetFilter f;
    f.kind_ = Kind::exponential_ma;
    f.name_ = "exponential";
    f.m_bound_ = m_bound;
    f.exp_a_ = a;
    f.exp_c_ = c;
    f.l_bound_ = std::fabs(c) * m_bound / (1.0 - a);
    // kernels materialized to a horizon where the tail is below double precision
    const int horizon = std::max(64, static_cast<int>(std::ceil(std::log(1e-18) / std::log(a))));
    f.kernels_ = VolterraKernelSet(1, horizon, 1);
    double coeff = c;
    for (int m = 0; m >= -horizon; --m) {
        const int lags[1] = {m};
        f.kernels_.set(lags, coeff);
        coeff *= a;
    }
    return f;
}

TargetFilter TargetFilter::fir_linear(double m_bound) {
    VolterraKernelSet ks(1, 2, 1);
    ks.set(std::vector<int>{0}, 0.3);
    ks.set(std::vector<int>{-1}, 0.2);
    ks.set(std::vector<int>{-2}, 0.1);
    TargetFilter f = custom(std::move(ks), m_bound, "fir-linear");
    f.kind_ = Kind::fir_linear;
    return f;
}

TargetFilter TargetFilter::quadratic_demo(double m_bound) {
    VolterraKernelSet ks(2, 2, 1);
    ks.set(std::vector<int>{0}, 0.3);
    ks.set(std::vector<int>{-1}, 0.2);
    ks.set(std::vector<int>{-2}, 0.1);
    ks.set(std::vector<int>{0, 0}, 0.05);
    ks.set(std::vector<int>{-1, 0}, 0.04);
    ks.set(std::vector<int>{0, -1}, 0.04);
    ks.set(std::vector<int>{-2, -1}, 0.02);
    ks.set(std::vector<int>{-1, -2}, 0.02);
    ks.set(std::vector<int>{-2, -2}, 0.01);
    TargetFilter f = custom(std::move(ks), m_bound, "fir-quadratic");
    f.kind_ = Kind::quadratic_demo;
    return f;
}

TargetFilter TargetFilter::custom(VolterraKernelSet kernels, double m_bound, std::string name) {
    if (m_bound <= 0.0) throw std::invalid_argument("TargetFilter: need M > 0");
    TargetFilter f;
    f.kind_ = Kind::custom_kernels;
    f.name_ = std::move(name);
    f.m_bound_ = m_bound;
    f.kernels_ = std::move(kernels);
    // L = sum |g| M^j bounds the output on K_M
    double l = 0.0;
    for (const auto& [lags, value] : f.kernels_.entries()) {
        double v = 0.0;
        for (double x : value) v = std::max(v, std::fabs(x));
        l += v * std::pow(m_bound, static_cast<double>(lags.size()));
    }
    f.l_bound_ = l;
    return f;
}

VolterraKernelSet TargetFilter::kernels(int p, int l) const { return kernels_.truncated(p, l); }

std::vector<double> TargetFilter::evaluate_full(std::span<const double> z_seq,
                                                std::size_t t) const {
    if (t >= z_seq.size()) throw std::invalid_argument("evaluate_full: index out of range");
    if (kind_ == Kind::exponential_ma) {
        // c * sum_{s>=0} a^s z_{t-s}, inputs before the sequence start are zero
        double acc = 0.0;
        double w = exp_c_;
        for (std::size_t s = 0; s <= t; ++s) {
            acc += w * z_seq[t - s];
            w *= exp_a_;
            if (std::fabs(w) < 1e-300) break;
        }
        return {acc};
    }
    // kernel-backed kinds: evaluate every stored tuple, zero-padding history
    std::vector<double> y(static_cast<std::size_t>(kernels_.m_out()), 0.0);
    for (const auto& [lags, value] : kernels_.entries()) {
        double prod = 1.0;
        bool in_range = true;
        for (int m : lags) {
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t) + m;
            if (idx < 0) {
                in_range = false;
                break;
            }
            prod *= z_seq[static_cast<std::size_t>(idx)];
        }
        if (!in_range) continue;
        for (std::size_t r = 0; r < y.size(); ++r) y[r] += prod * value[r];
    }
    return y;
}

double TargetFilter::forgetting(int l) const {
    if (l < 0) throw std::invalid_argument("forgetting: l must be >= 0");
    if (kind_ == Kind::exponential_ma)
        return std::fabs(exp_c_) * m_bound_ * std::pow(exp_a_, l + 1) / (1.0 - exp_a_);
    const auto mass = kernels_.tail_mass(l, m_bound_);
    double w = 0.0;
    for (double v : mass) w = std::max(w, v);
    return w;
}

std::vector<TargetFilter> builtin_filters() {
    return {TargetFilter::exponential_ma(0.5, 1.0, 1.0), TargetFilter::fir_linear(1.0),
            TargetFilter::quadratic_demo(1.0)};
}

TargetFilter builtin_filter(const std::string& name) {
    if (name == "exponential") return TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    if (name == "fir-linear") return TargetFilter::fir_linear(1.0);
    if (name == "fir-quadratic") return TargetFilter::quadratic_demo(1.0);
    throw std::invalid_argument("unknown builtin filter: " + name +
                                " (expected exponential, fir-linear, fir-quadratic)");
}

}  // namespace sigsas
