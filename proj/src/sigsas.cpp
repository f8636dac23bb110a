#include "sigsas/sigsas.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sigsas/simd.hpp"

namespace sigsas {

double SigSasConfig::max_lambda(double m, int p) {
    double mt = 0.0, mp = 1.0;
    for (int j = 0; j <= p; ++j) {
        mt += mp;
        mp *= m;
    }
    return std::min(1.0, 1.0 / mt);
}

SigSasConfig::SigSasConfig(double m, int l_, int p_, double lambda_, std::vector<int> i0_)
    : M(m), l(l_), p(p_), lambda(lambda_), i0(std::move(i0_)) {
    if (M <= 0.0) throw std::invalid_argument("SigSasConfig: M must be positive");
    if (l < 1) throw std::invalid_argument("SigSasConfig: l must be >= 1");
    if (p < 1) throw std::invalid_argument("SigSasConfig: p must be >= 1");
    shape = TensorShape(p, l);
    if (i0.empty()) {
        i0.resize(static_cast<std::size_t>(p) + 1);
        std::iota(i0.begin(), i0.end(), 1);
    }
    validate_i0(i0, shape);
    const double lim = max_lambda(M, p);
    if (!(lambda > 0.0 && lambda < lim))
        throw std::invalid_argument("SigSasConfig: lambda must lie in (0, " + std::to_string(lim) +
                                    ") for M=" + std::to_string(M) + ", p=" + std::to_string(p));
}

double SigSasConfig::m_tilde() const {
    // explicit power sum; the ratio form (1-M^{p+1})/(1-M) is singular at M=1
    double mt = 0.0, mp = 1.0;
    for (int j = 0; j <= p; ++j) {
        mt += mp;
        mp *= M;
    }
    return mt;
}

double SigSasConfig::contraction() const { return lambda * m_tilde(); }

double SigSasConfig::state_bound() const { return m_tilde() / (1.0 - contraction()); }

namespace {

void check_input(double z, const SigSasConfig& cfg) {
    if (!(std::fabs(z) <= cfg.M))
        throw std::invalid_argument("input |z| exceeds the bound M=" + std::to_string(cfg.M));
}

}  // namespace

TensorState step(const TensorState& x, double z, const SigSasConfig& cfg, int sign) {
    if (x.shape != cfg.shape) throw std::invalid_argument("step: state shape mismatch");
    check_input(z, cfg);
    const auto vand = vandermonde(z, cfg.p);
    const std::size_t n0 = cfg.shape.lowered_dim();
    const std::size_t b = static_cast<std::size_t>(cfg.shape.base_dim);
    TensorState out(cfg.shape);
    // lambda * (order_lower(x) (x) vandermonde(z)): the lowered slice is the
    // leading block of x, and slot s of the lift lands at n*b + i.
    for (std::size_t n = 0; n < n0; ++n) {
        const double c = cfg.lambda * x.coeffs[n];
        double* block = out.coeffs.data() + n * b;
        for (std::size_t i = 0; i < b; ++i) block[i] = c * vand[i];
    }
    // + sign * zhat0(z): positions (1,...,1,i), i in I0
    for (int i : cfg.i0) out.coeffs[static_cast<std::size_t>(i - 1)] += sign * vand[static_cast<std::size_t>(i - 1)];
    return out;
}

std::vector<TensorState> run(std::span<const double> z_seq, const TensorState& x_init,
                             const SigSasConfig& cfg, int sign) {
    std::vector<TensorState> states;
    states.reserve(z_seq.size());
    TensorState x = x_init;
    for (double z : z_seq) {
        x = step(x, z, cfg, sign);
        states.push_back(x);
    }
    return states;
}

TensorState run_final(std::span<const double> z_seq, const TensorState& x_init,
                      const SigSasConfig& cfg, int sign) {
    TensorState x = x_init;
    for (double z : z_seq) x = step(x, z, cfg, sign);
    return x;
}

TensorState closed_form(std::span<const double> window, const SigSasConfig& cfg, int sign) {
    if (window.size() < static_cast<std::size_t>(cfg.l + 1))
        throw std::invalid_argument("closed_form: window must cover l+1 inputs");
    const std::span<const double> w = window.subspan(window.size() - static_cast<std::size_t>(cfg.l + 1));
    for (double z : w) check_input(z, cfg);

    // leading term: sign * lambda^{l+1}/(1-lambda) * zhat(window); the whole
    // solution is linear in the drive sign, steady-state coefficient included
    TensorState acc = zhat(w, cfg.shape);
    const double lead = sign * std::pow(cfg.lambda, cfg.l + 1) / (1.0 - cfg.lambda);
    simd::scal(lead, acc.coeffs.data(), acc.coeffs.size());

    // + sum_{j=0..l} lambda^j * (j-fold lower-and-lift of zhat0 at t-j)
    double lam_j = 1.0;
    for (int j = 0; j <= cfg.l; ++j) {
        TensorState term = zhat0(w[w.size() - 1 - static_cast<std::size_t>(j)], cfg.i0, sign, cfg.shape);
        for (int s = j - 1; s >= 0; --s) {
            const auto vand = vandermonde(w[w.size() - 1 - static_cast<std::size_t>(s)], cfg.p);
            term = tensor_lift(order_lower(term), vand);
        }
        simd::axpy(lam_j, term.coeffs.data(), acc.coeffs.data(), acc.coeffs.size());
        lam_j *= cfg.lambda;
    }
    return acc;
}

TensorState MonomialMatrix::apply(const TensorState& v) const {
    if (v.shape != shape) throw std::invalid_argument("MonomialMatrix: shape mismatch");
    TensorState out = v;
    for (std::size_t i = 0; i < diag.size(); ++i) out.coeffs[i] *= diag[i];
    return out;
}

TensorState MonomialMatrix::apply_inverse(const TensorState& v) const {
    if (v.shape != shape) throw std::invalid_argument("MonomialMatrix: shape mismatch");
    TensorState out = v;
    for (std::size_t i = 0; i < diag.size(); ++i) out.coeffs[i] /= diag[i];
    return out;
}

double MonomialMatrix::min_diagonal() const {
    double m = diag.empty() ? 0.0 : diag[0];
    for (double d : diag) m = std::min(m, d);
    return m;
}

double MonomialMatrix::max_diagonal() const {
    double m = diag.empty() ? 0.0 : diag[0];
    for (double d : diag) m = std::max(m, d);
    return m;
}

MonomialMatrix monomial_matrix(const SigSasConfig& cfg, int sign, std::uint64_t check_seed,
                               int check_windows, double check_tol) {
    MonomialMatrix a;
    a.shape = cfg.shape;
    a.diag.assign(cfg.shape.flat_dim, 0.0);

    std::vector<bool> in_i0(static_cast<std::size_t>(cfg.shape.base_dim) + 1, false);
    for (int i : cfg.i0) in_i0[static_cast<std::size_t>(i)] = true;

    // Every summand of the closed form is a scaled sub-monomial of zhat, so A
    // is diagonal: the lambda^j summand touches the multi-indices whose first
    // l-j slots equal 1 and whose slot l+1-j lies in I0.
    const double lead = std::pow(cfg.lambda, cfg.l + 1) / (1.0 - cfg.lambda);
    for (std::size_t flat = 0; flat < cfg.shape.flat_dim; ++flat) {
        const auto multi = multi_index_of(flat, cfg.shape);
        double d = lead;
        double lam_j = 1.0;
        for (int j = 0; j <= cfg.l; ++j) {
            bool ones = true;
            for (int s = 0; s < cfg.l - j; ++s)
                if (multi[static_cast<std::size_t>(s)] != 1) { ones = false; break; }
            if (ones && in_i0[static_cast<std::size_t>(multi[static_cast<std::size_t>(cfg.l - j)])])
                d += lam_j;
            lam_j *= cfg.lambda;
        }
        a.diag[flat] = sign * d;  // the solution is linear in the drive sign
    }

    // the diagonal structure is asserted, not assumed: residual check against
    // the closed form on random admissible windows
    Rng rng(check_seed);
    std::vector<double> window(static_cast<std::size_t>(cfg.l + 1));
    for (int w = 0; w < check_windows; ++w) {
        for (auto& z : window) z = rng.uniform(-cfg.M, cfg.M);
        const TensorState lhs = a.apply(zhat(window, cfg.shape));
        const TensorState rhs = closed_form(window, cfg, sign);
        double worst = 0.0;
        for (std::size_t i = 0; i < lhs.coeffs.size(); ++i)
            worst = std::max(worst, std::fabs(lhs.coeffs[i] - rhs.coeffs[i]));
        if (worst > check_tol)
            throw std::runtime_error("monomial_matrix: residual identity failed, max residual " +
                                     std::to_string(worst));
    }
    return a;
}

TensorState random_state(const TensorShape& shape, double radius, Rng& rng) {
    TensorState x(shape);
    for (auto& c : x.coeffs) c = rng.gaussian();
    const double nrm = x.euclidean_norm();
    if (nrm > 0.0) {
        const double scale = radius * rng.uniform01() / nrm;
        simd::scal(scale, x.coeffs.data(), x.coeffs.size());
    }
    return x;
}

EspReport esp_diagnostic(const SigSasConfig& cfg, int trials, std::uint64_t seed,
                         double washout_tol) {
    if (trials < 1) throw std::invalid_argument("esp_diagnostic: trials must be >= 1");
    EspReport rep;
    rep.theoretical_bound = cfg.contraction();
    rep.trials = trials;
    rep.washout_tol = washout_tol;

    Rng rng(seed);
    const double radius = cfg.state_bound();
    double sum_factor = 0.0;
    for (int t = 0; t < trials; ++t) {
        const TensorState x1 = random_state(cfg.shape, radius, rng);
        const TensorState x2 = random_state(cfg.shape, radius, rng);
        const double z = rng.uniform(-cfg.M, cfg.M);
        const TensorState y1 = step(x1, z, cfg);
        const TensorState y2 = step(x2, z, cfg);
        double gap_in = 0.0, gap_out = 0.0;
        for (std::size_t i = 0; i < x1.coeffs.size(); ++i) {
            const double di = x1.coeffs[i] - x2.coeffs[i];
            const double dy = y1.coeffs[i] - y2.coeffs[i];
            gap_in += di * di;
            gap_out += dy * dy;
        }
        if (gap_in == 0.0) continue;
        const double factor = std::sqrt(gap_out / gap_in);
        rep.max_measured_factor = std::max(rep.max_measured_factor, factor);
        sum_factor += factor;
    }
    rep.mean_measured_factor = sum_factor / trials;

    // washout: drive two random states with a common input until they meet
    TensorState a = random_state(cfg.shape, radius, rng);
    TensorState b = random_state(cfg.shape, radius, rng);
    const int max_steps = 100000;
    for (int t = 0; t < max_steps; ++t) {
        double gap = 0.0;
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
            const double d = a.coeffs[i] - b.coeffs[i];
            gap += d * d;
        }
        rep.washout_gap_final = std::sqrt(gap);
        if (rep.washout_gap_final < washout_tol) {
            rep.washout_steps_measured = t;
            break;
        }
        const double z = rng.uniform(-cfg.M, cfg.M);
        a = step(a, z, cfg);
        b = step(b, z, cfg);
        rep.washout_steps_measured = t + 1;
    }
    return rep;
}

}  // namespace sigsas
