#include "sigsas/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sigsas/parallel.hpp"
#include "sigsas/simd.hpp"

namespace sigsas {

namespace {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_doubles(const std::vector<double>& v, std::uint64_t h) {
    return fnv1a64(reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(double), h);
}

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string reservoir_hash(const RandomSasReservoir& r) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t header[6] = {static_cast<std::uint64_t>(r.k), static_cast<std::uint64_t>(r.p),
                                     static_cast<std::uint64_t>(r.l), static_cast<std::uint64_t>(r.sign + 2),
                                     r.seed, static_cast<std::uint64_t>(r.i0.size())};
    h = fnv1a64(reinterpret_cast<const unsigned char*>(header), sizeof(header), h);
    for (const auto& a : r.a_mats) h = fnv1a64_doubles(a.data, h);
    h = fnv1a64_doubles(r.b.data, h);
    return hex64(h);
}

Readout transport_readout(const Readout& w, const JlMap& map) {
    if (w.w.cols != map.cols)
        throw std::invalid_argument("transport_readout: readout dimension does not match the map");
    Readout out;
    out.w = Matrix(w.w.rows, map.rows);
    // Wbar = W S^T: row r of Wbar is S (row r of W)
    for (std::size_t r = 0; r < w.w.rows; ++r)
        simd::matvec(map.s.data.data(), map.rows, map.cols, w.w.row(r), out.w.row(r));
    out.ridge = 0.0;
    out.provenance = Readout::Provenance::analytic_transport;
    return out;
}

std::vector<double> InputSpec::generate(std::size_t length, double m_bound,
                                        std::uint64_t seed) const {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("InputSpec: theta must lie in (0,1) so ||z||_inf < M strictly");
    if (!(envelope_a > 0.0 && envelope_a <= 1.0))
        throw std::invalid_argument("InputSpec: envelope_a must lie in (0,1]");
    Rng rng(seed);
    std::vector<double> z(length);
    for (std::size_t t = 0; t < length; ++t) {
        const double env = std::pow(envelope_a, static_cast<double>(length - 1 - t));
        z[t] = rng.uniform(-1.0, 1.0) * theta * m_bound * env;
    }
    return z;
}

namespace {

struct PipelineResult {
    SeedOutcome outcome;
    RandomSasReservoir reservoir;
    Matrix states;             // horizon x k, washout-trimmed
    std::vector<double> targets;  // horizon values of the target filter
};

/// Everything in the pipeline that depends on one seed only.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const TargetFilter& target,
                            std::uint64_t seed) {
    PipelineResult out;
    out.outcome.seed = seed;

    const double m_bound = target.input_bound();
    const TensorShape shape(cfg.p, cfg.l);
    const std::size_t n = shape.flat_dim;
    const std::size_t n0 = shape.lowered_dim();

    SigSasConfig base(m_bound, cfg.l, cfg.p, 1e-3, {});  // lambda replaced below
    const double m_tilde = base.m_tilde();
    const double lambda0 = lambda0_for(cfg.delta, cfg.k, n0, m_tilde);
    if (!(lambda0 > 0.0 && lambda0 < std::min(1.0, 1.0 / m_tilde)))
        throw std::invalid_argument("run_reduction_experiment: delta inadmissible, lambda0 = " +
                                    std::to_string(lambda0));
    SigSasConfig cfg_sas(m_bound, cfg.l, cfg.p, lambda0, {});
    out.outcome.lambda0 = lambda0;

    // resample until the distance audit, surjectivity, and the lambda0
    // contraction condition against the drawn map all hold
    JlMap map;
    double f_norm = 0.0;
    int attempts_total = 0;
    for (int attempt = 1;; ++attempt) {
        if (attempt > cfg.map_attempts)
            throw std::runtime_error("run_reduction_experiment: no admissible JL draw within " +
                                     std::to_string(cfg.map_attempts) + " attempts");
        map = sample_jl(n, static_cast<std::size_t>(cfg.k),
                        derive_seed(seed, 0x3a9 + static_cast<std::uint64_t>(attempt)),
                        cfg.epsilon);
        attempts_total = attempt;
        if (!jl_surjective(map)) continue;
        if (!check_pm_basis_distances(map, cfg.epsilon).pass) continue;
        f_norm = jl_operator_norm(map);
        if (lambda0 * m_tilde * f_norm * f_norm >= 1.0) continue;
        break;
    }
    out.outcome.map_attempts = attempts_total;
    out.outcome.f_norm = f_norm;

    Rng sign_rng(derive_seed(seed, 0x51e4u));
    const int sign = sign_rng.rademacher();
    out.reservoir = reduce_from_jl(cfg_sas, map, sign);
    out.outcome.reservoir_hash = reservoir_hash(out.reservoir);

    // analytic readout over the tensor space, transported to the reduced space
    const Readout w_tensor = readout_from_kernels(target.kernels(cfg.p, cfg.l), cfg_sas, sign);
    const Readout w_bar = transport_readout(w_tensor, map);
    out.outcome.w_norm = w_tensor.norm();

    // drive the reduced reservoir
    const std::size_t total = static_cast<std::size_t>(cfg.washout + cfg.horizon);
    const std::vector<double> z = cfg.input.generate(total, m_bound, derive_seed(seed, 0x1f0u));
    out.outcome.sup_input = 0.0;
    for (double v : z) out.outcome.sup_input = std::max(out.outcome.sup_input, std::fabs(v));

    const std::size_t k = static_cast<std::size_t>(cfg.k);
    out.states = Matrix(static_cast<std::size_t>(cfg.horizon), k);
    {
        std::vector<double> x(k, 0.0);
        for (std::size_t t = 0; t < total; ++t) {
            x = step_reduced(x, z[t], out.reservoir);
            if (t >= static_cast<std::size_t>(cfg.washout))
                std::memcpy(out.states.row(t - static_cast<std::size_t>(cfg.washout)), x.data(),
                            k * sizeof(double));
        }
    }
    out.targets.resize(static_cast<std::size_t>(cfg.horizon));
    for (std::size_t t = 0; t < out.targets.size(); ++t)
        out.targets[t] =
            target.evaluate_full(z, t + static_cast<std::size_t>(cfg.washout)).at(0);

    // bound components
    BoundBreakdown bound;
    bound.w_term = target.forgetting(cfg.l);
    bound.taylor_term = truncation_bound(m_bound, target.output_bound(), cfg.p,
                                         out.outcome.sup_input, 0.0);
    const double denom = 1.0 - 0.5 * cfg.delta * std::sqrt(static_cast<double>(cfg.k) /
                                                           static_cast<double>(n0));
    const double denom2 = denom * denom;
    bound.ilp_sqrt = out.outcome.w_norm * std::sqrt(cfg.epsilon) *
                     std::pow(static_cast<double>(n), 0.75) * m_tilde *
                     std::sqrt(1.0 + f_norm * f_norm) / denom2;
    bound.ilp_linear = out.outcome.w_norm * cfg.epsilon * static_cast<double>(n) * m_tilde / denom2;
    out.outcome.bound = bound;

    // analytic-transport error trajectory
    auto audit = [&](const Readout& readout, ReadoutTrajectory& traj) {
        double sum = 0.0;
        for (std::size_t t = 0; t < out.targets.size(); ++t) {
            const double y = readout.apply(
                std::span<const double>(out.states.row(t), k))[0];
            const double err = std::fabs(y - out.targets[t]);
            traj.max_error = std::max(traj.max_error, err);
            sum += err;
            if (err > bound.total_sqrt()) ++traj.violations_sqrt;
            if (err > bound.total_linear()) ++traj.violations_linear;
        }
        traj.mean_error = sum / static_cast<double>(out.targets.size());
    };
    out.outcome.analytic.provenance = provenance_name(Readout::Provenance::analytic_transport);
    audit(w_bar, out.outcome.analytic);

    // fitted readout on the same states and targets
    Matrix target_mat(out.targets.size(), 1);
    for (std::size_t t = 0; t < out.targets.size(); ++t) target_mat.at(t, 0) = out.targets[t];
    const double ridge = cfg.ridge >= 0.0 ? cfg.ridge : default_ridge(out.states);
    const Readout w_fit = fit_readout(out.states, target_mat, ridge);
    out.outcome.fitted.provenance = provenance_name(Readout::Provenance::least_squares);
    out.outcome.fitted.ilp_applicable = false;  // no tensor-space readout of its own
    audit(w_fit, out.outcome.fitted);

    // held-out stream from the same distribution
    {
        const std::vector<double> z2 =
            cfg.input.generate(total, m_bound, derive_seed(seed, 0x401d0u));
        std::vector<double> x(k, 0.0);
        double sum_fit = 0.0, sum_an = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < total; ++t) {
            x = step_reduced(x, z2[t], out.reservoir);
            if (t < static_cast<std::size_t>(cfg.washout)) continue;
            const double y_true = target.evaluate_full(z2, t).at(0);
            const double e_fit = std::fabs(w_fit.apply(x)[0] - y_true);
            const double e_an = std::fabs(w_bar.apply(x)[0] - y_true);
            out.outcome.fitted.holdout_max_error = std::max(out.outcome.fitted.holdout_max_error, e_fit);
            out.outcome.analytic.holdout_max_error = std::max(out.outcome.analytic.holdout_max_error, e_an);
            sum_fit += e_fit;
            sum_an += e_an;
            ++count;
        }
        out.outcome.fitted.holdout_mean_error = sum_fit / static_cast<double>(count);
        out.outcome.analytic.holdout_mean_error = sum_an / static_cast<double>(count);
    }
    return out;
}

}  // namespace

ExperimentReport run_reduction_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const TargetFilter target = builtin_filter(cfg.target);

    ExperimentReport report;
    report.config = cfg;
    report.m_bound = target.input_bound();
    const TensorShape shape(cfg.p, cfg.l);
    report.n = shape.flat_dim;
    report.n0 = shape.lowered_dim();
    report.m_tilde = SigSasConfig(target.input_bound(), cfg.l, cfg.p, 1e-6, {}).m_tilde();

    report.seeds.resize(static_cast<std::size_t>(cfg.n_seeds));
    parallel_for(static_cast<std::size_t>(cfg.n_seeds), [&](std::size_t i) {
        PipelineResult res = run_pipeline(cfg, target, derive_seed(cfg.seed, i));
        report.seeds[i] = res.outcome;
    });

    for (const auto& s : report.seeds) {
        if (s.analytic.violations_sqrt || s.analytic.violations_linear ||
            s.fitted.violations_sqrt || s.fitted.violations_linear)
            report.all_within_bounds = false;
    }
    report.runtime_ms = ms_since(t0);
    return report;
}

UniversalityReport strong_universality_demo(const std::vector<std::string>& targets,
                                            const ExperimentConfig& shared) {
    if (targets.size() < 2)
        throw std::invalid_argument("strong_universality_demo: need at least two targets");
    const auto t0 = std::chrono::steady_clock::now();

    // one reservoir serves every target, so the targets must agree on M
    std::vector<TargetFilter> filters;
    filters.reserve(targets.size());
    for (const auto& name : targets) filters.push_back(builtin_filter(name));
    const double m_bound = filters.front().input_bound();
    for (const auto& f : filters)
        if (f.input_bound() != m_bound)
            throw std::invalid_argument("strong_universality_demo: targets disagree on M");

    UniversalityReport report;
    report.shared = shared;

    ExperimentConfig cfg = shared;
    cfg.target = targets.front();
    const std::uint64_t seed = derive_seed(shared.seed, 0);

    // shared reservoir and states
    const TensorShape shape(cfg.p, cfg.l);
    SigSasConfig cfg_sas(m_bound, cfg.l, cfg.p,
                         lambda0_for(cfg.delta, cfg.k, shape.lowered_dim(),
                                     SigSasConfig(m_bound, cfg.l, cfg.p, 1e-6, {}).m_tilde()),
                         {});
    JlMap map;
    for (int attempt = 1;; ++attempt) {
        if (attempt > cfg.map_attempts)
            throw std::runtime_error("strong_universality_demo: no admissible JL draw");
        map = sample_jl(shape.flat_dim, static_cast<std::size_t>(cfg.k),
                        derive_seed(seed, 0x3a9 + static_cast<std::uint64_t>(attempt)), cfg.epsilon);
        if (!jl_surjective(map)) continue;
        if (!check_pm_basis_distances(map, cfg.epsilon).pass) continue;
        const double fn = jl_operator_norm(map);
        if (cfg_sas.lambda * cfg_sas.m_tilde() * fn * fn >= 1.0) continue;
        break;
    }
    Rng sign_rng(derive_seed(seed, 0x51e4u));
    const int sign = sign_rng.rademacher();
    const RandomSasReservoir reservoir = reduce_from_jl(cfg_sas, map, sign);
    const std::string rhash = reservoir_hash(reservoir);

    const std::size_t total = static_cast<std::size_t>(cfg.washout + cfg.horizon);
    const std::vector<double> z = cfg.input.generate(total, m_bound, derive_seed(seed, 0x1f0u));
    double sup_input = 0.0;
    for (double v : z) sup_input = std::max(sup_input, std::fabs(v));

    const std::size_t k = static_cast<std::size_t>(cfg.k);
    Matrix states(static_cast<std::size_t>(cfg.horizon), k);
    {
        std::vector<double> x(k, 0.0);
        for (std::size_t t = 0; t < total; ++t) {
            x = step_reduced(x, z[t], reservoir);
            if (t >= static_cast<std::size_t>(cfg.washout))
                std::memcpy(states.row(t - static_cast<std::size_t>(cfg.washout)), x.data(),
                            k * sizeof(double));
        }
    }

    const double ridge = cfg.ridge >= 0.0 ? cfg.ridge : default_ridge(states);
    for (std::size_t f = 0; f < filters.size(); ++f) {
        const TargetFilter& target = filters[f];
        UniversalityRow row;
        row.target = targets[f];
        row.reservoir_hash = rhash;

        Matrix y(static_cast<std::size_t>(cfg.horizon), 1);
        for (std::size_t t = 0; t < y.rows; ++t)
            y.at(t, 0) = target.evaluate_full(z, t + static_cast<std::size_t>(cfg.washout)).at(0);

        const Readout w_fit = fit_readout(states, y, ridge);
        const Readout w_tensor = readout_from_kernels(target.kernels(cfg.p, cfg.l), cfg_sas, sign);
        const Readout w_bar = transport_readout(w_tensor, map);

        const double denom =
            1.0 - 0.5 * cfg.delta *
                      std::sqrt(static_cast<double>(cfg.k) / static_cast<double>(shape.lowered_dim()));
        const double ilp_linear = w_tensor.norm() * cfg.epsilon *
                                  static_cast<double>(shape.flat_dim) * cfg_sas.m_tilde() /
                                  (denom * denom);
        row.bound_total_linear =
            target.forgetting(cfg.l) +
            truncation_bound(m_bound, target.output_bound(), cfg.p, sup_input, 0.0) + ilp_linear;

        double sum_fit = 0.0;
        for (std::size_t t = 0; t < y.rows; ++t) {
            const std::span<const double> x(states.row(t), k);
            const double e_fit = std::fabs(w_fit.apply(x)[0] - y.at(t, 0));
            const double e_an = std::fabs(w_bar.apply(x)[0] - y.at(t, 0));
            row.fitted_max_error = std::max(row.fitted_max_error, e_fit);
            row.analytic_max_error = std::max(row.analytic_max_error, e_an);
            sum_fit += e_fit;
            if (e_fit > row.bound_total_linear || e_an > row.bound_total_linear)
                row.within_bound = false;
        }
        row.fitted_mean_error = sum_fit / static_cast<double>(y.rows);
        row.readout_hash = hex64(fnv1a64_doubles(w_fit.w.data, 0xcbf29ce484222325ULL));
        report.rows.push_back(std::move(row));
    }

    for (const auto& row : report.rows)
        if (row.reservoir_hash != rhash) report.shared_reservoir = false;
    report.runtime_ms = ms_since(t0);
    return report;
}

}  // namespace sigsas
