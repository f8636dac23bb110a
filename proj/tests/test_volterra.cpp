#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sigsas/rng.hpp"
#include "sigsas/volterra.hpp"

using namespace sigsas;

TEST_SUITE("volterra") {

TEST_CASE("kernel set storage and validation") {
    VolterraKernelSet ks(2, 1, 1);
    ks.set(std::vector<int>{0}, 0.3);
    ks.set(std::vector<int>{-1, 0}, 0.05);
    CHECK(ks.size() == 2);
    CHECK_THROWS_AS(ks.set(std::vector<int>{-2}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ks.set(std::vector<int>{0, 0, 0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ks.set(std::vector<int>{1}, 1.0), std::invalid_argument);
}

TEST_CASE("eval_truncated on pinned kernels") {
    VolterraKernelSet linear(1, 1, 1);
    linear.set(std::vector<int>{0}, 0.3);
    linear.set(std::vector<int>{-1}, 0.2);
    const std::vector<double> w{1.0, 1.0};
    CHECK(eval_truncated(linear, w, 1)[0] == doctest::Approx(0.5));

    VolterraKernelSet empty(2, 1, 1);
    CHECK(eval_truncated(empty, w, 1)[0] == 0.0);

    VolterraKernelSet quad(2, 1, 1);
    quad.set(std::vector<int>{-1, 0}, 0.05);
    quad.set(std::vector<int>{0, -1}, 0.05);
    const std::vector<double> w2{2.0, 3.0};
    CHECK(eval_truncated(quad, w2, 1)[0] == doctest::Approx(0.6));

    CHECK_THROWS_AS(eval_truncated(linear, w, 0), std::invalid_argument);
}

TEST_CASE("truncation_bound arithmetic and validity") {
    CHECK(truncation_bound(1.0, 1.0, 3, 0.0, 0.0) == 0.0);
    CHECK(truncation_bound(1.0, 1.0, 3, 0.5, 0.01) == doctest::Approx(0.135));
    CHECK_THROWS_AS(truncation_bound(1.0, 1.0, 3, 1.0, 0.0), std::invalid_argument);
    // monotone decreasing in p
    double prev = 1e300;
    for (int p = 1; p < 8; ++p) {
        const double b = truncation_bound(1.0, 2.0, p, 0.6, 0.0);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("readout matches kernel coefficients on the monomial side") {
    // p=1, l=1, g1(0)=0.3, g1(-1)=0.2: W∘A sends (1,2)->0.3, (2,1)->0.2,
    // (1,1)->0, (2,2)->0
    const SigSasConfig cfg(1.0, 1, 1, 0.25, std::vector<int>{1, 2});
    VolterraKernelSet ks(1, 1, 1);
    ks.set(std::vector<int>{0}, 0.3);
    ks.set(std::vector<int>{-1}, 0.2);
    const Readout w = readout_from_kernels(ks, cfg);
    const MonomialMatrix a = monomial_matrix(cfg);
    auto wa_at = [&](std::vector<int> multi) {
        const std::size_t flat = lex_index(multi, cfg.shape);
        return w.w.at(0, flat) * a.diag[flat];
    };
    CHECK(wa_at({1, 2}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(wa_at({2, 1}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(wa_at({1, 1}) == doctest::Approx(0.0));
    CHECK(wa_at({2, 2}) == doctest::Approx(0.0));
}

TEST_CASE("zero kernels give the zero readout") {
    const SigSasConfig cfg(1.0, 2, 2, 0.2, {});
    VolterraKernelSet ks(2, 2, 1);
    const Readout w = readout_from_kernels(ks, cfg);
    for (double v : w.w.data) CHECK(v == 0.0);
}

TEST_CASE("readout identity: W closed_form == eval_truncated on random windows") {
    const SigSasConfig cfg(1.0, 2, 2, 0.2, {});
    const TargetFilter target = TargetFilter::quadratic_demo(1.0);
    const VolterraKernelSet ks = target.kernels(cfg.p, cfg.l);
    Rng rng(44);
    std::vector<double> w(static_cast<std::size_t>(cfg.l) + 1);
    for (int sign : {+1, -1}) {
        const Readout readout = readout_from_kernels(ks, cfg, sign);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            for (auto& z : w) z = rng.uniform(-cfg.M, cfg.M);
            const TensorState state = closed_form(w, cfg, sign);
            const double lhs = readout.apply(state.coeffs)[0];
            const double rhs = eval_truncated(ks, w, w.size() - 1)[0];
            worst = std::max(worst, std::fabs(lhs - rhs));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("readout rejects kernels exceeding the configuration") {
    const SigSasConfig cfg(1.0, 1, 1, 0.25, {});
    VolterraKernelSet deep(1, 2, 1);
    deep.set(std::vector<int>{-2}, 1.0);
    CHECK_THROWS_AS(readout_from_kernels(deep, cfg), std::invalid_argument);
    VolterraKernelSet high(2, 1, 1);
    high.set(std::vector<int>{0, 0}, 1.0);
    CHECK_THROWS_AS(readout_from_kernels(high, cfg), std::invalid_argument);
}

TEST_CASE("exponential target: exact tail and full-vs-truncated gap") {
    const TargetFilter f = TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    // wU_3 = a^{l+1}/(1-a) * M = 0.0625/0.5
    CHECK(f.forgetting(3) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(f.output_bound() == doctest::Approx(2.0));

    // tail sums match a numeric evaluation of the discarded part
    Rng rng(3);
    std::vector<double> z(400);
    for (auto& v : z) v = rng.uniform(-1.0, 1.0);
    for (int l : {2, 4, 6}) {
        const VolterraKernelSet ks = f.kernels(3, l);
        double worst = 0.0;
        for (std::size_t t = 350; t < z.size(); ++t) {
            const double full = f.evaluate_full(z, t)[0];
            const double trunc = eval_truncated(ks, z, t)[0];
            worst = std::max(worst, std::fabs(full - trunc));
        }
        CHECK(worst <= f.forgetting(l) + 1e-12);
    }
}

TEST_CASE("analytic truncation bound holds for the exponential target") {
    const TargetFilter f = TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    Rng rng(4);
    std::vector<double> z(300);
    for (auto& v : z) v = rng.uniform(-0.9, 0.9);
    double sup = 0.0;
    for (double v : z) sup = std::max(sup, std::fabs(v));
    for (int p = 2; p <= 4; ++p) {
        for (int l = 2; l <= 4; ++l) {
            const VolterraKernelSet ks = f.kernels(p, l);
            const double bound = truncation_bound(1.0, f.output_bound(), p, sup, f.forgetting(l));
            for (std::size_t t = 250; t < z.size(); ++t) {
                const double gap =
                    std::fabs(f.evaluate_full(z, t)[0] - eval_truncated(ks, z, t)[0]);
                CHECK(gap <= bound);
            }
        }
    }
}

TEST_CASE("bound decreases when p or l grows on a fixed input set") {
    const TargetFilter f = TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    const double sup = 0.5;
    double prev_l = 1e300;
    for (int l = 1; l <= 6; ++l) {
        const double b = truncation_bound(1.0, f.output_bound(), 3, sup, f.forgetting(l));
        CHECK(b < prev_l);
        prev_l = b;
    }
}

TEST_CASE("catalog filters vanish on zero input") {
    std::vector<double> zeros(20, 0.0);
    for (const auto& f : builtin_filters()) {
        for (std::size_t t = 3; t < zeros.size(); ++t)
            CHECK(f.evaluate_full(zeros, t)[0] == 0.0);
        // forgetting is monotone with zero limit
        double prev = 1e300;
        for (int l = 0; l <= 12; ++l) {
            CHECK(f.forgetting(l) <= prev + 1e-15);
            prev = f.forgetting(l);
        }
        CHECK(f.forgetting(200) <= 1e-12);
    }
}

TEST_CASE("fir quadratic on pinned input") {
    const TargetFilter f = TargetFilter::quadratic_demo(1.0);
    std::vector<double> z{0.0, 0.0, 1.0};  // z_{t-2}=0, z_{t-1}=0, z_t=1
    // only lags {0}: g1(0)=0.3, g2(0,0)=0.05
    CHECK(f.evaluate_full(z, 2)[0] == doctest::Approx(0.35));
}

TEST_CASE("builtin catalog lookup") {
    CHECK(builtin_filter("exponential").kind() == TargetFilter::Kind::exponential_ma);
    CHECK(builtin_filter("fir-linear").kind() == TargetFilter::Kind::fir_linear);
    CHECK(builtin_filter("fir-quadratic").kind() == TargetFilter::Kind::quadratic_demo);
    CHECK_THROWS_AS(builtin_filter("nope"), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("volterra") {

TEST_CASE("measured truncation error never grows with p or l") {
    Rng rng(71);
    std::vector<double> z(500);
    for (auto& v : z) v = rng.uniform(-0.5, 0.5);

    // exponential target: error is set by the lag tail alone
    const TargetFilter expf = TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    double prev = 1e300;
    for (int l = 1; l <= 6; ++l) {
        const VolterraKernelSet ks = expf.kernels(3, l);
        double worst = 0.0;
        for (std::size_t t = 50; t < z.size(); ++t)
            worst = std::max(worst,
                             std::fabs(expf.evaluate_full(z, t)[0] - eval_truncated(ks, z, t)[0]));
        CHECK(worst <= prev);
        prev = worst;
    }
    // and degree truncation is idle for a linear filter
    const VolterraKernelSet k2 = expf.kernels(2, 4);
    const VolterraKernelSet k5 = expf.kernels(5, 4);
    for (std::size_t t = 50; t < 60; ++t)
        CHECK(eval_truncated(k2, z, t)[0] == eval_truncated(k5, z, t)[0]);

    // quadratic target: p=1 drops the quadratic part, p>=2 is exact
    const TargetFilter quad = TargetFilter::quadratic_demo(1.0);
    double err_p1 = 0.0, err_p2 = 0.0;
    for (std::size_t t = 50; t < z.size(); ++t) {
        err_p1 = std::max(err_p1, std::fabs(quad.evaluate_full(z, t)[0] -
                                            eval_truncated(quad.kernels(1, 2), z, t)[0]));
        err_p2 = std::max(err_p2, std::fabs(quad.evaluate_full(z, t)[0] -
                                            eval_truncated(quad.kernels(2, 2), z, t)[0]));
    }
    CHECK(err_p2 <= 1e-15);
    CHECK(err_p1 > err_p2);
}

TEST_CASE("doubling l shrinks the exponential tail at rate a^l") {
    const TargetFilter f = TargetFilter::exponential_ma(0.5, 1.0, 1.0);
    for (int l : {2, 3, 5}) {
        const double ratio = f.forgetting(2 * l) / f.forgetting(l);
        CHECK(ratio == doctest::Approx(std::pow(0.5, l)).epsilon(1e-12));
    }
}

}  // TEST_SUITE
