#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sigsas/random_sas.hpp"
#include "sigsas/rng.hpp"

using namespace sigsas;

namespace {

std::vector<double> random_dense(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

double vec_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(g);
}

}  // namespace

TEST_SUITE("random-sas") {

TEST_CASE("lambda0 formula reproduces the composite-bound denominators") {
    const double mt = 1.75;
    const double lam = lambda0_for(0.1, 20, 10000, mt);
    CHECK(lam * mt == doctest::Approx(0.05 * std::sqrt(20.0 / 10000.0)).epsilon(1e-14));
}

TEST_CASE("build_direct determinism and entry laws") {
    const RandomSasReservoir r1 = build_direct(30, 2, 2, 0.5, {}, 0.1, 42);
    const RandomSasReservoir r2 = build_direct(30, 2, 2, 0.5, {}, 0.1, 42);
    for (std::size_t i = 0; i < r1.a_mats.size(); ++i)
        CHECK(r1.a_mats[i].data == r2.a_mats[i].data);
    CHECK(r1.b.data == r2.b.data);

    // moment audit of the A entries over many draws
    const double mt = r1.m_tilde();
    const double target_var = 0.1 * 0.1 / (4.0 * 30.0 * mt * mt);
    std::vector<double> pool;
    for (int d = 0; d < 40; ++d) {
        const RandomSasReservoir r = build_direct(30, 2, 2, 0.5, {}, 0.1, derive_seed(7, d));
        for (const auto& a : r.a_mats) pool.insert(pool.end(), a.data.begin(), a.data.end());
    }
    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= static_cast<double>(pool.size());
    double var = 0.0;
    for (double v : pool) var += (v - mean) * (v - mean);
    var /= static_cast<double>(pool.size() - 1);
    CHECK(var == doctest::Approx(target_var).epsilon(0.02));

    // B columns outside I0 are exactly zero
    const RandomSasReservoir r3 = build_direct(10, 2, 1, 0.5, std::vector<int>{1, 3}, 0.1, 9);
    for (int j = 0; j < r3.k; ++j) {
        CHECK(r3.b.at(static_cast<std::size_t>(j), 1) == 0.0);
        CHECK(r3.b.at(static_cast<std::size_t>(j), 0) != 0.0);
    }
}

TEST_CASE("build_direct rejects inadmissible delta with the maximum reported") {
    // k large relative to N0 makes lambda0 blow past the cap
    CHECK_THROWS_WITH_AS(build_direct(100000, 1, 1, 0.5, {}, 0.9, 1),
                         doctest::Contains("maximal admissible delta"), std::invalid_argument);
    CHECK(max_admissible_delta(100000, 1, 1, 0.5) > 0.0);
}

TEST_CASE("step_reduced on pinned inputs and against a loop oracle") {
    const RandomSasReservoir r = build_direct(12, 3, 2, 0.5, {}, 0.1, 11);
    const std::size_t k = static_cast<std::size_t>(r.k);
    Rng rng(3);

    // x = 0: only the affine part B vandermonde(z)
    {
        const std::vector<double> zero(k, 0.0);
        const auto out = step_reduced(zero, 0.3, r);
        const auto vand = vandermonde(0.3, r.p);
        for (std::size_t j = 0; j < k; ++j) {
            double expect = 0.0;
            for (std::size_t m = 0; m <= static_cast<std::size_t>(r.p); ++m)
                expect += r.b.at(j, m) * vand[m];
            CHECK(out[j] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    // z = 0: A_1 x + B e_1
    {
        const auto x = random_dense(k, rng);
        const auto out = step_reduced(x, 0.0, r);
        for (std::size_t j = 0; j < k; ++j) {
            double expect = r.b.at(j, 0);
            for (std::size_t m = 0; m < k; ++m) expect += r.a_mats[0].at(j, m) * x[m];
            CHECK(out[j] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    // random (x, z): explicit componentwise loop
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_dense(k, rng);
        const double z = rng.uniform(-r.M, r.M);
        const auto out = step_reduced(x, z, r);
        for (std::size_t j = 0; j < k; ++j) {
            double expect = 0.0;
            for (int i = 0; i <= r.p; ++i)
                for (std::size_t m = 0; m < k; ++m)
                    expect += std::pow(z, i) * r.a_mats[static_cast<std::size_t>(i)].at(j, m) * x[m];
            for (int i = 0; i <= r.p; ++i)
                expect += r.b.at(j, static_cast<std::size_t>(i)) * std::pow(z, i);
            CHECK(out[j] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(step_reduced(std::vector<double>(k, 0.0), 2.0 * r.M, r),
                    std::invalid_argument);
}

TEST_CASE("reduce_from_jl equals f o SigSAS-step o f* exactly") {
    for (int sign : {+1, -1}) {
        const SigSasConfig cfg(0.5, 2, 2, 0.2, {});
        const JlMap map = sample_jl(cfg.shape.flat_dim, 10, 77, 0.5);
        const RandomSasReservoir r = reduce_from_jl(cfg, map, sign);
        Rng rng(31);
        for (int trial = 0; trial < 100; ++trial) {
            const auto x = random_dense(10, rng);
            const double z = rng.uniform(-cfg.M, cfg.M);
            const auto via_matrices = step_reduced(x, z, r);
            const auto lifted = map.apply_adjoint(x);
            const TensorState state(cfg.shape, lifted);
            const auto via_tensor = map.apply(step(state, z, cfg, sign).coeffs);
            CHECK(vec_gap(via_matrices, via_tensor) <= 1e-12);
        }
    }
}

TEST_CASE("reduce_from_jl entries match the block-sum formula") {
    const SigSasConfig cfg(0.5, 1, 2, 0.2, {});  // N = 9, N0 = 3
    const JlMap map = sample_jl(cfg.shape.flat_dim, 4, 5, 0.5);
    const RandomSasReservoir r = reduce_from_jl(cfg, map, +1);
    const std::size_t n0 = cfg.shape.lowered_dim();
    for (int i = 1; i <= cfg.p + 1; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t m = 0; m < 4; ++m) {
                double expect = 0.0;
                for (std::size_t n = 0; n < n0; ++n)
                    expect += map.s.at(j, static_cast<std::size_t>(i - 1) +
                                              n * static_cast<std::size_t>(cfg.p + 1)) *
                              map.s.at(m, n);
                expect *= cfg.lambda;
                CHECK(r.a_mats[static_cast<std::size_t>(i - 1)].at(j, m) ==
                      doctest::Approx(expect).epsilon(1e-13));
            }
    // B_{j,m} = sign S_{j,m} inside I0, zero outside
    const SigSasConfig cfg2(0.5, 1, 2, 0.2, std::vector<int>{1, 3});
    const RandomSasReservoir r2 = reduce_from_jl(cfg2, map, -1);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(r2.b.at(j, 0) == -map.s.at(j, 0));
        CHECK(r2.b.at(j, 1) == 0.0);
        CHECK(r2.b.at(j, 2) == -map.s.at(j, 2));
    }
}

TEST_CASE("reduced-step washout under the certified contraction") {
    // the contraction statement needs rho |||f|||^2 < 1 only, not the
    // distance audit, so a plain draw suffices
    const SigSasConfig cfg(0.5, 2, 2, 0.05, {});
    const JlMap map = sample_jl(cfg.shape.flat_dim, 12, 13, 0.9);
    const double fn = jl_operator_norm(map);
    const double rho_reduced = cfg.contraction() * fn * fn;
    REQUIRE(rho_reduced < 1.0);
    const RandomSasReservoir r = reduce_from_jl(cfg, map, +1);
    CHECK(r.esp_condition_ok);
    Rng rng(37);
    std::vector<double> a = random_dense(12, rng), b = random_dense(12, rng);
    double gap = vec_gap(a, b);
    for (int t = 0; t < 60; ++t) {
        const double z = rng.uniform(-cfg.M, cfg.M);
        a = step_reduced(a, z, r);
        b = step_reduced(b, z, r);
        const double next = vec_gap(a, b);
        CHECK(next <= rho_reduced * gap * (1.0 + 1e-12));
        gap = next;
    }
    CHECK(gap < 1e-10);
}

TEST_CASE("estimate_mp: grid never beats the triangle bound, degenerate case is zero") {
    RandomSasReservoir r = build_direct(8, 2, 2, 0.5, {}, 0.1, 23);
    const MpEstimate est = estimate_mp(r, 101);
    CHECK(est.grid <= est.triangle_upper * (1.0 + 1e-9));
    CHECK(est.refined >= est.grid);

    for (auto& a : r.a_mats) std::fill(a.data.begin(), a.data.end(), 0.0);
    const MpEstimate zero_est = estimate_mp(r, 51);
    CHECK(zero_est.refined == 0.0);
    CHECK(zero_est.triangle_upper == 0.0);
}

TEST_CASE("esp certificate at reduced scale") {
    EspCertificateConfig cfg;
    cfg.k = 12;
    cfg.p = 2;
    cfg.l = 2;
    cfg.m_bound = 0.5;
    cfg.delta = 0.1;
    cfg.trials = 150;
    cfg.grid_points = 201;
    cfg.seed = 5;
    const EspCertificate cert = esp_certificate(cfg);
    CHECK(cert.pass);
    CHECK(cert.failures == 0);  // massive concentration below 1 at these sizes
    CHECK(cert.triangle_violations == 0);
    CHECK(cert.certified_level == doctest::Approx(0.1 + 3.0 * std::sqrt(0.09 / 150.0)));
    CHECK(cert.max_mp_seen < 1.0);
}

TEST_CASE("law audit at reduced scale") {
    LawAuditConfig cfg;
    cfg.k = 8;
    cfg.p = 4;
    cfg.l_schedule = {3};  // N0 = 125
    cfg.m_bound = 0.5;
    cfg.delta = 0.1;
    cfg.trials = 150;
    cfg.cells = 40;
    cfg.corr_pairs = 8;
    cfg.var_samples = 4000;
    cfg.seed = 2;
    const LawAuditReport rep = law_audit(cfg);
    REQUIRE(rep.cases.size() == 1);
    const auto& c = rep.cases[0];
    CHECK(c.n0 == 125);
    // at N0 = 125 the CLT is already good enough for alpha = 0.01 cells
    CHECK(c.ks_fraction_not_rejected >= 0.9);
    CHECK(c.b_outside_i0_zero);
    CHECK(c.var_expected == doctest::Approx(125.0 / 64.0));
    CHECK(c.var_rel_error < 0.10);
    CHECK(c.correlations_ok);
}

}  // TEST_SUITE
