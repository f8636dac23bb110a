#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sigsas/rng.hpp"
#include "sigsas/sigsas.hpp"

using namespace sigsas;

namespace {

// Componentwise re-evaluation of the state map over explicit multi-indices:
// out(i1..i_{l+1}) = lambda * x(1, i1..i_l) * z^{i_{l+1}-1}
//                  + sign * z^{i_{l+1}-1} [i1=..=i_l=1, i_{l+1} in I0].
// Deliberately index-based, sharing no code with step().
TensorState brute_force_step(const TensorState& x, double z, const SigSasConfig& cfg, int sign) {
    TensorState out(cfg.shape);
    for (std::size_t flat = 0; flat < cfg.shape.flat_dim; ++flat) {
        const auto multi = multi_index_of(flat, cfg.shape);
        std::vector<int> shifted(multi.size());
        shifted[0] = 1;
        for (std::size_t s = 0; s + 1 < multi.size(); ++s) shifted[s + 1] = multi[s];
        const int last = multi.back();
        double acc = cfg.lambda * x.coeffs[lex_index(shifted, cfg.shape)] *
                     std::pow(z, static_cast<double>(last - 1));
        bool leading_ones = true;
        for (std::size_t s = 0; s + 1 < multi.size(); ++s)
            if (multi[s] != 1) leading_ones = false;
        bool in_i0 = false;
        for (int i : cfg.i0)
            if (i == last) in_i0 = true;
        if (leading_ones && in_i0) acc += sign * std::pow(z, static_cast<double>(last - 1));
        out.coeffs[flat] = acc;
    }
    return out;
}

double state_gap(const TensorState& a, const TensorState& b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        const double d = a.coeffs[i] - b.coeffs[i];
        g += d * d;
    }
    return std::sqrt(g);
}

}  // namespace

TEST_SUITE("sigsas") {

TEST_CASE("config invariants") {
    CHECK_THROWS_AS(SigSasConfig(0.5, 1, 1, 0.9, {}), std::invalid_argument);  // 0.9 > 1/1.5
    CHECK_THROWS_AS(SigSasConfig(0.5, 0, 1, 0.1, {}), std::invalid_argument);
    CHECK_THROWS_AS(SigSasConfig(0.5, 1, 1, 0.1, std::vector<int>{2, 3}), std::invalid_argument);
    const SigSasConfig cfg(0.5, 3, 2, 0.25, {});
    CHECK(cfg.m_tilde() == doctest::Approx(1.75));
    CHECK(cfg.contraction() == doctest::Approx(0.4375));
    CHECK(cfg.state_bound() == doctest::Approx(1.75 / (1 - 0.4375)));
    CHECK(cfg.i0 == std::vector<int>{1, 2, 3});
    // m_tilde stays finite at M = 1 (the power-sum form)
    const SigSasConfig unit(1.0, 2, 3, 0.2, {});
    CHECK(unit.m_tilde() == doctest::Approx(4.0));
}

TEST_CASE("step on pinned inputs") {
    const SigSasConfig cfg(1.0, 1, 1, 0.25, std::vector<int>{1, 2});
    TensorState zero(cfg.shape);
    const auto s1 = step(zero, 0.5, cfg);
    CHECK(s1.coeffs == std::vector<double>{1.0, 0.5, 0.0, 0.0});

    TensorState e11(cfg.shape);
    e11.coeffs[0] = 1.0;
    const auto s2 = step(e11, 0.0, cfg);
    CHECK(s2.coeffs == std::vector<double>{1.25, 0.0, 0.0, 0.0});

    CHECK_THROWS_AS(step(zero, 1.5, cfg), std::invalid_argument);
}

TEST_CASE("step equals the componentwise brute-force oracle") {
    const SigSasConfig cfg(0.8, 3, 2, 0.3, std::vector<int>{1, 3});
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        TensorState x(cfg.shape);
        for (auto& c : x.coeffs) c = rng.uniform(-2, 2);
        const double z = rng.uniform(-cfg.M, cfg.M);
        for (int sign : {+1, -1}) {
            const auto fast = step(x, z, cfg, sign);
            const auto slow = brute_force_step(x, z, cfg, sign);
            for (std::size_t i = 0; i < fast.coeffs.size(); ++i)
                CHECK(fast.coeffs[i] == doctest::Approx(slow.coeffs[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("contraction property over random pairs") {
    const SigSasConfig cfg(0.5, 2, 2, 0.4, {});
    const double rho = cfg.contraction();
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        TensorState x1 = random_state(cfg.shape, cfg.state_bound(), rng);
        TensorState x2 = random_state(cfg.shape, cfg.state_bound(), rng);
        const double z = rng.uniform(-cfg.M, cfg.M);
        const double gap_out = state_gap(step(x1, z, cfg), step(x2, z, cfg));
        const double gap_in = state_gap(x1, x2);
        CHECK(gap_out <= rho * gap_in * (1.0 + 1e-12));
    }
}

TEST_CASE("ball invariance over a long random drive") {
    const SigSasConfig cfg(0.5, 2, 2, 0.4, {});
    const double radius = cfg.state_bound();
    Rng rng(6);
    TensorState x = random_state(cfg.shape, radius, rng);
    for (int t = 0; t < 10000; ++t) {
        x = step(x, rng.uniform(-cfg.M, cfg.M), cfg);
        CHECK(x.euclidean_norm() <= radius + 1e-9);
    }
}

TEST_CASE("constant-zero input converges to coefficient 1/(1-lambda)") {
    const SigSasConfig cfg(0.5, 2, 1, 0.25, {});
    std::vector<double> zeros(200, 0.0);
    const TensorState x = run_final(zeros, TensorState(cfg.shape), cfg);
    CHECK(x.coeffs[0] == doctest::Approx(1.0 / (1.0 - cfg.lambda)).epsilon(1e-12));
    for (std::size_t i = 1; i < x.coeffs.size(); ++i) CHECK(x.coeffs[i] == 0.0);
}

TEST_CASE("two initial states contract together under a common drive") {
    const SigSasConfig cfg(0.5, 2, 2, 0.25, {});
    const double rho = cfg.contraction();
    Rng rng(7);
    TensorState a = random_state(cfg.shape, cfg.state_bound(), rng);
    TensorState b = random_state(cfg.shape, cfg.state_bound(), rng);
    double gap = state_gap(a, b);
    for (int t = 0; t < 50; ++t) {
        const double z = rng.uniform(-cfg.M, cfg.M);
        a = step(a, z, cfg);
        b = step(b, z, cfg);
        const double next = state_gap(a, b);
        CHECK(next <= rho * gap * (1.0 + 1e-12));
        gap = next;
    }
}

TEST_CASE("closed form on pinned windows") {
    const SigSasConfig cfg(1.0, 1, 1, 0.25, std::vector<int>{1, 2});
    // all-zero input: coefficient 1/(1-lambda) at (1,...,1)
    const auto x0 = closed_form(std::vector<double>{0.0, 0.0}, cfg);
    CHECK(x0.coeffs[0] == doctest::Approx(1.0 / 0.75).epsilon(1e-14));
    CHECK(x0.coeffs[1] == 0.0);
    CHECK(x0.coeffs[2] == 0.0);
    CHECK(x0.coeffs[3] == 0.0);

    // window (a, b): with I0 = {1,2} both the leading term and the lambda^1
    // term reach the full multi-index (2,2), giving lambda/(1-lambda) * a b
    const double a = 0.37, b = -0.81;
    const auto x = closed_form(std::vector<double>{a, b}, cfg);
    CHECK(x.coeffs[3] == doctest::Approx(cfg.lambda / (1.0 - cfg.lambda) * a * b).epsilon(1e-13));
    // (2,1) only the leading term and the lambda term with free last slot:
    // lambda^2/(1-lambda) a + lambda a = lambda/(1-lambda) a
    CHECK(x.coeffs[2] == doctest::Approx(cfg.lambda / (1.0 - cfg.lambda) * a).epsilon(1e-13));

    CHECK_THROWS_AS(closed_form(std::vector<double>{0.5}, cfg), std::invalid_argument);
}

TEST_CASE("closed form equals a washed-out run") {
    const SigSasConfig cfg(0.5, 3, 2, 0.25, {});
    Rng rng(8);
    const int washout = 200;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> z(washout + cfg.l + 1);
        for (auto& v : z) v = rng.uniform(-cfg.M, cfg.M);
        for (int sign : {+1, -1}) {
            const TensorState via_run = run_final(z, TensorState(cfg.shape), cfg, sign);
            const TensorState via_form = closed_form(z, cfg, sign);
            CHECK(state_gap(via_run, via_form) <= 1e-10);
        }
    }
}

TEST_CASE("time invariance on finite windows") {
    const SigSasConfig cfg(0.5, 2, 2, 0.3, {});
    Rng rng(9);
    std::vector<double> z(40);
    for (auto& v : z) v = rng.uniform(-cfg.M, cfg.M);
    // shifting the input shifts the closed-form state sequence
    const auto w1 = std::vector<double>(z.begin() + 5, z.begin() + 5 + cfg.l + 1);
    const auto w2 = std::vector<double>(z.begin() + 12, z.begin() + 12 + cfg.l + 1);
    std::vector<double> z_shifted(z.begin() + 7, z.end());
    const auto w1s = std::vector<double>(z_shifted.begin() + 5, z_shifted.begin() + 5 + cfg.l + 1);
    CHECK(state_gap(closed_form(w2, cfg), closed_form(w1s, cfg)) == 0.0);
    CHECK(state_gap(closed_form(w1, cfg), closed_form(w1, cfg)) == 0.0);
}

TEST_CASE("monomial matrix diagonal entries") {
    const SigSasConfig cfg(0.5, 3, 2, 0.25, {});  // I0 = {1,2,3}
    const MonomialMatrix a = monomial_matrix(cfg);
    const double lam = cfg.lambda;
    const double lead = std::pow(lam, cfg.l + 1) / (1.0 - lam);

    // (1,...,1) collects every summand: lead + sum_{j=0..l} lambda^j = 1/(1-lambda)
    CHECK(a.diag[0] == doctest::Approx(1.0 / (1.0 - lam)).epsilon(1e-14));

    // a multi-index with i1 >= 2: with the full I0 the lambda^l term still
    // reaches it, so the entry is lead + lambda^l
    std::vector<int> deep{2, 1, 1, 1};
    CHECK(a.diag[lex_index(deep, cfg.shape)] ==
          doctest::Approx(lead + std::pow(lam, cfg.l)).epsilon(1e-13));

    // restricting I0 = {1,2} makes first-slot index 3 unreachable: exactly lead
    const SigSasConfig cfg2(0.5, 3, 2, 0.25, std::vector<int>{1, 2});
    const MonomialMatrix a2 = monomial_matrix(cfg2);
    std::vector<int> unreachable{3, 2, 1, 2};
    CHECK(a2.diag[lex_index(unreachable, cfg2.shape)] == doctest::Approx(lead).epsilon(1e-13));

    // every diagonal entry is at least the leading coefficient, hence invertible
    CHECK(a.min_diagonal() >= lead - 1e-15);
    CHECK(a2.min_diagonal() >= lead - 1e-15);
}

TEST_CASE("monomial identity A zhat == closed_form on random windows") {
    const SigSasConfig cfg(0.5, 3, 2, 0.25, {});
    const MonomialMatrix a = monomial_matrix(cfg);
    Rng rng(10);
    std::vector<double> w(static_cast<std::size_t>(cfg.l) + 1);
    for (int trial = 0; trial < 100; ++trial) {
        for (auto& z : w) z = rng.uniform(-cfg.M, cfg.M);
        const auto lhs = a.apply(zhat(w, cfg.shape));
        const auto rhs = closed_form(w, cfg);
        CHECK(state_gap(lhs, rhs) <= 1e-12);
    }
    // and the identity transfers to washed-out runs
    std::vector<double> z(204);
    for (auto& v : z) v = rng.uniform(-cfg.M, cfg.M);
    const auto x = run_final(z, TensorState(cfg.shape), cfg);
    const auto w_last = std::vector<double>(z.end() - (cfg.l + 1), z.end());
    CHECK(state_gap(a.apply(zhat(w_last, cfg.shape)), x) <= 1e-10);
}

TEST_CASE("esp diagnostic fields") {
    const SigSasConfig cfg(0.5, 3, 2, 0.25, {});
    const EspReport rep = esp_diagnostic(cfg, 200, 77);
    CHECK(rep.theoretical_bound == doctest::Approx(0.4375));
    CHECK(rep.max_measured_factor <= rep.theoretical_bound * (1.0 + 1e-12));
    CHECK(rep.mean_measured_factor <= rep.max_measured_factor);
    CHECK(rep.washout_gap_final < rep.washout_tol);
    // geometric decay: washout length is near log(tol / (2L)) / log(rho)
    const double expect =
        std::log(rep.washout_tol / (2.0 * cfg.state_bound())) / std::log(cfg.contraction());
    CHECK(rep.washout_steps_measured <= expect + 5);
    CHECK(rep.washout_steps_measured >= 1);
}

TEST_CASE("diagnostic contraction tightens as lambda approaches the cap") {
    const double cap = SigSasConfig::max_lambda(0.5, 2);
    const SigSasConfig tight(0.5, 2, 2, 0.98 * cap, {});
    const EspReport rep = esp_diagnostic(tight, 100, 3);
    CHECK(rep.theoretical_bound > 0.9);
    CHECK(rep.washout_steps_measured >
          esp_diagnostic(SigSasConfig(0.5, 2, 2, 0.25, {}), 100, 3).washout_steps_measured);
}

}  // TEST_SUITE
