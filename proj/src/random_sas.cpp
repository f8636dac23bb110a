#include "sigsas/random_sas.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sigsas/parallel.hpp"
#include "sigsas/simd.hpp"

namespace sigsas {

namespace {

double power_sum(double m, int p) {
    double mt = 0.0, mp = 1.0;
    for (int j = 0; j <= p; ++j) {
        mt += mp;
        mp *= m;
    }
    return mt;
}

std::vector<int> default_i0(int p) {
    std::vector<int> i0(static_cast<std::size_t>(p) + 1);
    std::iota(i0.begin(), i0.end(), 1);
    return i0;
}

}  // namespace

double RandomSasReservoir::m_tilde() const { return power_sum(M, p); }

std::size_t RandomSasReservoir::n0() const {
    std::size_t d = 1;
    for (int s = 0; s < l; ++s) d *= static_cast<std::size_t>(p + 1);
    return d;
}

std::size_t RandomSasReservoir::flat_dim() const { return n0() * static_cast<std::size_t>(p + 1); }

double lambda0_for(double delta, int k, std::size_t n0, double m_tilde) {
    return delta / (2.0 * m_tilde) * std::sqrt(static_cast<double>(k) / static_cast<double>(n0));
}

double max_admissible_delta(int k, int p, int l, double m_bound) {
    const double mt = power_sum(m_bound, p);
    std::size_t n0 = 1;
    for (int s = 0; s < l; ++s) n0 *= static_cast<std::size_t>(p + 1);
    const double lambda_cap = std::min(1.0, 1.0 / mt);
    return 2.0 * mt * lambda_cap * std::sqrt(static_cast<double>(n0) / static_cast<double>(k));
}

RandomSasReservoir build_direct(int k, int p, int l, double m_bound, std::vector<int> i0,
                                double delta, std::uint64_t seed) {
    if (k < 1 || p < 1 || l < 1)
        throw std::invalid_argument("build_direct: k, p, l must be >= 1");
    if (m_bound <= 0.0) throw std::invalid_argument("build_direct: M must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("build_direct: delta must lie in (0,1)");

    RandomSasReservoir r;
    r.k = k;
    r.p = p;
    r.l = l;
    r.M = m_bound;
    r.i0 = i0.empty() ? default_i0(p) : std::move(i0);
    validate_i0(r.i0, TensorShape(p, l));
    r.delta = delta;
    r.seed = seed;
    r.sign = 1;
    r.construction = RandomSasReservoir::Construction::direct_law;

    const double mt = r.m_tilde();
    const double lambda0 = lambda0_for(delta, k, r.n0(), mt);
    const double cap = std::min(1.0, 1.0 / mt);
    if (!(lambda0 < cap))
        throw std::invalid_argument(
            "build_direct: delta too large, lambda_0 = " + std::to_string(lambda0) +
            " violates the admissibility cap " + std::to_string(cap) +
            "; maximal admissible delta = " +
            std::to_string(max_admissible_delta(k, p, l, m_bound)));
    r.lambda = lambda0;

    // draw order fixed by contract: A_1..A_{p+1} row-major, then B columns
    Rng rng(seed);
    const double sigma_a = delta / (2.0 * std::sqrt(static_cast<double>(k)) * mt);
    const double sigma_b = 1.0 / std::sqrt(static_cast<double>(k));
    r.a_mats.reserve(static_cast<std::size_t>(p) + 1);
    for (int i = 0; i <= p; ++i) {
        Matrix a(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
        rng.fill_gaussian(a.data.data(), a.data.size(), sigma_a);
        r.a_mats.push_back(std::move(a));
    }
    r.b = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(p) + 1);
    std::vector<bool> in_i0(static_cast<std::size_t>(p) + 2, false);
    for (int i : r.i0) in_i0[static_cast<std::size_t>(i)] = true;
    for (int m = 1; m <= p + 1; ++m) {
        if (!in_i0[static_cast<std::size_t>(m)]) continue;  // columns outside I0 stay exactly zero
        for (int j = 0; j < k; ++j)
            r.b.at(static_cast<std::size_t>(j), static_cast<std::size_t>(m - 1)) =
                sigma_b * rng.gaussian();
    }
    return r;
}

std::vector<double> step_reduced(std::span<const double> x, double z,
                                 const RandomSasReservoir& r) {
    if (x.size() != static_cast<std::size_t>(r.k))
        throw std::invalid_argument("step_reduced: state dimension mismatch");
    if (!(std::fabs(z) <= r.M))
        throw std::invalid_argument("step_reduced: input |z| exceeds the bound M=" +
                                    std::to_string(r.M));
    const std::size_t k = static_cast<std::size_t>(r.k);
    std::vector<double> out(k, 0.0);
    std::vector<double> tmp(k);
    double zpow = 1.0;
    for (int i = 0; i <= r.p; ++i) {
        simd::matvec(r.a_mats[static_cast<std::size_t>(i)].data.data(), k, k, x.data(), tmp.data());
        simd::axpy(zpow, tmp.data(), out.data(), k);
        zpow *= z;
    }
    const auto vand = vandermonde(z, r.p);
    simd::matvec(r.b.data.data(), k, static_cast<std::size_t>(r.p) + 1, vand.data(), tmp.data());
    simd::axpy(1.0, tmp.data(), out.data(), k);
    return out;
}

RandomSasReservoir reduce_from_jl(const SigSasConfig& cfg, const JlMap& map, int sign) {
    if (map.cols != cfg.shape.flat_dim)
        throw std::invalid_argument("reduce_from_jl: map column count must equal (p+1)^{l+1}");
    if (sign != 1 && sign != -1) throw std::invalid_argument("reduce_from_jl: sign must be +-1");

    const std::size_t k = map.rows;
    const std::size_t n0 = cfg.shape.lowered_dim();
    const std::size_t pb = static_cast<std::size_t>(cfg.shape.base_dim);

    RandomSasReservoir r;
    r.k = static_cast<int>(k);
    r.p = cfg.p;
    r.l = cfg.l;
    r.M = cfg.M;
    r.i0 = cfg.i0;
    r.delta = 0.0;
    r.lambda = cfg.lambda;
    r.seed = map.seed;
    r.sign = sign;
    r.construction = RandomSasReservoir::Construction::jl_constructed;
    const double f_norm = jl_operator_norm(map);
    r.esp_condition_ok = cfg.lambda * cfg.m_tilde() * f_norm * f_norm < 1.0;

    // S blocked column-wise: S_low = columns of the lowered block (first N0 of
    // the strided layout is NOT contiguous here; the lowered block is the
    // first N0 flat coordinates, i.e. columns 0..N0-1), and the strided gather
    // S^i with columns (i-1) + n*(p+1).
    Matrix s_low(k, n0);
    for (std::size_t j = 0; j < k; ++j) {
        const double* row = map.s.row(j);
        std::copy(row, row + n0, s_low.row(j));
    }
    Matrix s_str(k, n0);
    r.a_mats.reserve(pb);
    for (std::size_t i = 0; i < pb; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double* row = map.s.row(j);
            double* dst = s_str.row(j);
            for (std::size_t n = 0; n < n0; ++n) dst[n] = row[i + n * pb];
        }
        Matrix a(k, k);
        simd::gemm_nt(s_str.data.data(), k, s_low.data.data(), k, n0, a.data.data());
        simd::scal(cfg.lambda, a.data.data(), a.data.size());
        r.a_mats.push_back(std::move(a));
    }

    // B = sign * S C^{I0}: column m of B is sign * (column m of S) inside I0
    r.b = Matrix(k, pb);
    for (int m : cfg.i0)
        for (std::size_t j = 0; j < k; ++j)
            r.b.at(j, static_cast<std::size_t>(m - 1)) =
                sign * map.s.at(j, static_cast<std::size_t>(m - 1));
    return r;
}

MpEstimate estimate_mp(const RandomSasReservoir& r, int grid_points) {
    const std::size_t k = static_cast<std::size_t>(r.k);
    MpEstimate est;

    // triangle upper bound sum M^{i-1} |||A_i|||
    double zpow = 1.0;
    for (int i = 0; i <= r.p; ++i) {
        est.triangle_upper += zpow * operator_norm(r.a_mats[static_cast<std::size_t>(i)]);
        zpow *= r.M;
    }

    Matrix poly(k, k);
    std::vector<double> v(k), av(k), w(k);
    Rng rng(derive_seed(r.seed, 0x9d0fu));
    for (auto& x : v) x = rng.gaussian();
    double nv = std::sqrt(simd::sum_sq(v.data(), k));
    simd::scal(1.0 / nv, v.data(), k);

    auto norm_at = [&](double z) {
        // P(z) = sum z^{i-1} A_i, then warm-started power iteration on P^T P
        std::fill(poly.data.begin(), poly.data.end(), 0.0);
        double zp = 1.0;
        for (int i = 0; i <= r.p; ++i) {
            simd::axpy(zp, r.a_mats[static_cast<std::size_t>(i)].data.data(), poly.data.data(),
                       poly.data.size());
            zp *= z;
        }
        double lambda_prev = -1.0;
        for (int it = 0; it < 200; ++it) {
            simd::matvec(poly.data.data(), k, k, v.data(), av.data());
            simd::matvec_t(poly.data.data(), k, k, av.data(), w.data());
            const double lambda = std::sqrt(simd::sum_sq(w.data(), k));
            if (lambda == 0.0) return 0.0;
            simd::scal(1.0 / lambda, w.data(), k);
            v.swap(w);
            if (lambda_prev >= 0.0 && std::fabs(lambda - lambda_prev) <= 1e-12 * lambda) {
                lambda_prev = lambda;
                break;
            }
            lambda_prev = lambda;
        }
        return std::sqrt(lambda_prev);
    };

    if (grid_points < 3) grid_points = 3;
    const double h = 2.0 * r.M / (grid_points - 1);
    double best = -1.0, best_z = -r.M;
    for (int g = 0; g < grid_points; ++g) {
        const double z = -r.M + h * g;
        const double nrm = norm_at(z);
        if (nrm > best) {
            best = nrm;
            best_z = z;
        }
    }
    est.grid = best;

    // golden-section refinement around the grid argmax
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(-r.M, best_z - h);
    double b = std::min(r.M, best_z + h);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = norm_at(c), fd = norm_at(d);
    for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = norm_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = norm_at(d);
        }
    }
    est.refined = std::max(est.grid, std::max(fc, fd));
    est.argmax_z = fc > fd ? c : d;
    return est;
}

EspCertificate esp_certificate(const EspCertificateConfig& cfg) {
    if (cfg.trials < 100)
        throw std::invalid_argument("esp_certificate: trials must be >= 100");
    EspCertificate cert;
    cert.config = cfg;

    std::vector<double> mp(static_cast<std::size_t>(cfg.trials));
    std::vector<int> tri_violation(static_cast<std::size_t>(cfg.trials), 0);
    const std::vector<int> i0 = cfg.i0.empty() ? default_i0(cfg.p) : cfg.i0;

    parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
        const RandomSasReservoir r =
            build_direct(cfg.k, cfg.p, cfg.l, cfg.m_bound, i0, cfg.delta,
                         derive_seed(cfg.seed, t));
        const MpEstimate est = estimate_mp(r, cfg.grid_points);
        mp[t] = est.refined;
        tri_violation[t] = est.grid > est.triangle_upper * (1.0 + 1e-9) ? 1 : 0;
    });

    double sum = 0.0;
    for (std::size_t t = 0; t < mp.size(); ++t) {
        sum += mp[t];
        cert.max_mp_seen = std::max(cert.max_mp_seen, mp[t]);
        if (mp[t] >= 1.0) ++cert.failures;
        cert.triangle_violations += tri_violation[t];
    }
    cert.mean_mp = sum / static_cast<double>(cfg.trials);
    cert.failure_rate = static_cast<double>(cert.failures) / static_cast<double>(cfg.trials);
    cert.binomial_slack =
        3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / static_cast<double>(cfg.trials));
    cert.certified_level = cfg.delta + cert.binomial_slack;
    cert.pass = cert.failure_rate <= cert.certified_level && cert.triangle_violations == 0;
    return cert;
}

namespace {

// One sample of the unnormalized diagonal sum sum_n S_{j, i+(n-1)(1+p)} S_{j,n}
// without materializing the row: draw the first N0 positions, reuse them where
// the strided index lands below N0, and draw the rest fresh.
double diagonal_sum_sample(int i_one_based, std::size_t n0, int p, double sigma, Rng& rng,
                           std::vector<double>& u) {
    u.resize(n0);
    for (auto& x : u) x = sigma * rng.gaussian();
    const std::size_t stride = static_cast<std::size_t>(p) + 1;
    const std::size_t off = static_cast<std::size_t>(i_one_based - 1);
    double acc = 0.0;
    for (std::size_t n = 0; n < n0; ++n) {
        const std::size_t col = off + n * stride;  // 0-based strided position
        const double s_str = col < n0 ? u[col] : sigma * rng.gaussian();
        acc += s_str * u[n];
    }
    return acc;
}

}  // namespace

LawAuditReport law_audit(const LawAuditConfig& cfg) {
    if (cfg.trials < 100) throw std::invalid_argument("law_audit: trials must be >= 100");
    LawAuditReport report;
    report.config = cfg;

    const std::vector<int> i0 = default_i0(cfg.p);
    const double mt = power_sum(cfg.m_bound, cfg.p);

    for (int l : cfg.l_schedule) {
        LawAuditCase c;
        c.l = l;
        std::size_t n0 = 1;
        for (int s = 0; s < l; ++s) n0 *= static_cast<std::size_t>(cfg.p + 1);
        c.n0 = n0;
        c.lambda0 = lambda0_for(cfg.delta, cfg.k, n0, mt);
        c.sigma_a = cfg.delta / (2.0 * std::sqrt(static_cast<double>(cfg.k)) * mt);

        // deterministic cell selection, quartered across the four regimes
        // (i=1, off-diag), (i>=2, off-diag), (i=1, diag), (i>=2, diag), with
        // duplicates rejected: a repeated cell would multiply one unlucky
        // rejection into several. Exhausted regimes (the i=1 diagonal pool
        // only has k cells) spill over to the next one.
        std::vector<KsCell> cells;
        std::set<std::array<int, 3>> used;
        Rng cell_rng(derive_seed(cfg.seed, 0xce11u));
        auto draw_from = [&](int regime, KsCell& cell) {
            for (int attempt = 0; attempt < 400; ++attempt) {
                cell.i = (regime % 2 == 0) ? 1
                                           : 2 + static_cast<int>(cell_rng.next_u64() %
                                                                  static_cast<std::uint64_t>(cfg.p));
                cell.j = static_cast<int>(cell_rng.next_u64() % static_cast<std::uint64_t>(cfg.k));
                if (regime < 2) {
                    do {
                        cell.m = static_cast<int>(cell_rng.next_u64() %
                                                  static_cast<std::uint64_t>(cfg.k));
                    } while (cell.m == cell.j);
                } else {
                    cell.m = cell.j;
                }
                if (used.insert({cell.i, cell.j, cell.m}).second) return true;
            }
            return false;
        };
        for (int cidx = 0; cidx < cfg.cells; ++cidx) {
            KsCell cell;
            bool found = false;
            for (int shift = 0; shift < 4 && !found; ++shift)
                found = draw_from((cidx + shift) % 4, cell);
            if (!found) break;  // every pool exhausted
            cells.push_back(cell);
        }

        // correlation pairs: (A_i)_{j,m} against B_{j,m} with m inside I0 and
        // j != m so the two map rows are distinct
        std::vector<CorrCell> corr(static_cast<std::size_t>(cfg.corr_pairs));
        for (int q = 0; q < cfg.corr_pairs; ++q) {
            corr[static_cast<std::size_t>(q)].i = 1 + (q % (cfg.p + 1));
            corr[static_cast<std::size_t>(q)].m = q % std::min(cfg.p + 1, cfg.k);
            do {
                corr[static_cast<std::size_t>(q)].j =
                    static_cast<int>(cell_rng.next_u64() % static_cast<std::uint64_t>(cfg.k));
            } while (corr[static_cast<std::size_t>(q)].j == corr[static_cast<std::size_t>(q)].m);
        }

        const std::size_t n_cells = cells.size();
        Matrix ks_samples(static_cast<std::size_t>(cfg.trials), n_cells);
        Matrix corr_a(static_cast<std::size_t>(cfg.trials), corr.size());
        Matrix corr_b(static_cast<std::size_t>(cfg.trials), corr.size());

        const double sigma_s = 1.0 / std::sqrt(static_cast<double>(cfg.k));
        const std::size_t stride = static_cast<std::size_t>(cfg.p) + 1;
        const std::size_t trials = static_cast<std::size_t>(cfg.trials);

        // Every (cell, trial) gets its own map draw, materialized only on the
        // two rows the entry formula touches. Sharing one draw across cells
        // would correlate their test statistics and cluster rejections.
        parallel_for(n_cells, [&](std::size_t ci) {
            const KsCell& cell = cells[ci];
            const std::size_t off = static_cast<std::size_t>(cell.i - 1);
            Rng rng(derive_seed(cfg.seed, 0xa0d17 + ci));
            std::vector<double> low(n0), str(n0);
            for (std::size_t t = 0; t < trials; ++t) {
                for (auto& x : low) x = sigma_s * rng.gaussian();
                double acc = 0.0;
                if (cell.j == cell.m) {
                    // same row: strided positions below N0 reuse the low part
                    for (std::size_t n = 0; n < n0; ++n) {
                        const std::size_t pos = off + n * stride;
                        const double s_str = pos < n0 ? low[pos] : sigma_s * rng.gaussian();
                        acc += s_str * low[n];
                    }
                } else {
                    for (auto& x : str) x = sigma_s * rng.gaussian();
                    for (std::size_t n = 0; n < n0; ++n) acc += str[n] * low[n];
                }
                ks_samples.at(t, ci) = c.lambda0 * acc;
            }
        });

        // correlation pairs: (A_i)_{j,m} and B_{j,m} from one draw per trial;
        // j != m, so row j carries the strided factors and the B entry, row m
        // the lowered block
        parallel_for(corr.size(), [&](std::size_t q) {
            const CorrCell& cc = corr[q];
            const std::size_t off = static_cast<std::size_t>(cc.i - 1);
            const std::size_t b_pos = static_cast<std::size_t>(cc.m);  // 0-based column in row j
            Rng rng(derive_seed(cfg.seed, 0xc0ffe + q));
            std::vector<double> low(n0), str(n0);
            for (std::size_t t = 0; t < trials; ++t) {
                for (auto& x : low) x = sigma_s * rng.gaussian();
                for (auto& x : str) x = sigma_s * rng.gaussian();
                double acc = 0.0;
                for (std::size_t n = 0; n < n0; ++n) acc += str[n] * low[n];
                // S_{j, b_pos} reuses the strided draw when the position lies
                // on the stride lattice of row j
                double s_jm;
                if (b_pos >= off && (b_pos - off) % stride == 0 && (b_pos - off) / stride < n0)
                    s_jm = str[(b_pos - off) / stride];
                else
                    s_jm = sigma_s * rng.gaussian();
                const int r_sign = rng.rademacher();
                corr_a.at(t, q) = c.lambda0 * acc;
                corr_b.at(t, q) = r_sign * s_jm;
            }
        });

        // audit B columns outside I0 through the constructed path once, at a
        // small flat dimension is unnecessary: the construction zeroes them by
        // contract; verify on one real reservoir draw
        {
            SigSasConfig small(cfg.m_bound, 1, cfg.p, 0.9 * SigSasConfig::max_lambda(cfg.m_bound, cfg.p),
                               std::vector<int>{1, 2});
            const JlMap map = sample_jl(small.shape.flat_dim,
                                        std::min<std::size_t>(cfg.k, small.shape.flat_dim),
                                        derive_seed(cfg.seed, 0xb0u), 0.5);
            const RandomSasReservoir r = reduce_from_jl(small, map, 1);
            for (int m = 1; m <= small.shape.base_dim; ++m) {
                const bool inside = std::find(small.i0.begin(), small.i0.end(), m) != small.i0.end();
                if (inside) continue;
                for (int j = 0; j < r.k; ++j)
                    if (r.b.at(static_cast<std::size_t>(j), static_cast<std::size_t>(m - 1)) != 0.0)
                        c.b_outside_i0_zero = false;
            }
        }

        int not_rejected = 0;
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
            for (std::size_t t = 0; t < samples.size(); ++t) samples[t] = ks_samples.at(t, ci);
            const KsResult ks = ks_test_normal(std::move(samples), c.sigma_a);
            cells[ci].p_value = ks.p_value;
            cells[ci].rejected = ks.p_value < cfg.alpha;
            if (!cells[ci].rejected) ++not_rejected;
        }
        c.ks_cells = cells;
        c.ks_fraction_not_rejected = static_cast<double>(not_rejected) / static_cast<double>(n_cells);

        const double corr_threshold = 3.0 / std::sqrt(static_cast<double>(cfg.trials));
        for (std::size_t q = 0; q < corr.size(); ++q) {
            std::vector<double> xa(static_cast<std::size_t>(cfg.trials)),
                xb(static_cast<std::size_t>(cfg.trials));
            for (std::size_t t = 0; t < xa.size(); ++t) {
                xa[t] = corr_a.at(t, q);
                xb[t] = corr_b.at(t, q);
            }
            corr[q].correlation = pearson_correlation(xa, xb);
            corr[q].threshold = corr_threshold;
            corr[q].ok = std::fabs(corr[q].correlation) <= corr_threshold;
            c.max_abs_correlation = std::max(c.max_abs_correlation, std::fabs(corr[q].correlation));
            if (!corr[q].ok) c.correlations_ok = false;
        }
        c.correlations = corr;

        // variance of the unnormalized diagonal sum for a fixed i >= 2
        {
            const int i_var = std::min(2, cfg.p + 1);
            const unsigned workers = worker_count();
            std::vector<double> all(static_cast<std::size_t>(cfg.var_samples));
            const std::size_t per =
                (all.size() + workers - 1) / workers;
            parallel_for(workers, [&](std::size_t w) {
                Rng rng(derive_seed(cfg.seed, 0x7a77 + w));
                std::vector<double> u;
                const std::size_t lo = w * per;
                const std::size_t hi = std::min(all.size(), lo + per);
                for (std::size_t idx = lo; idx < hi; ++idx)
                    all[idx] = diagonal_sum_sample(i_var, n0, cfg.p, sigma_s, rng, u);
            });
            const Moments mom = sample_moments(all);
            c.var_measured = mom.variance;
            c.var_expected = static_cast<double>(n0) /
                             (static_cast<double>(cfg.k) * static_cast<double>(cfg.k));
            c.var_rel_error = std::fabs(c.var_measured - c.var_expected) / c.var_expected;
        }

        report.cases.push_back(std::move(c));
    }
    return report;
}

}  // namespace sigsas
