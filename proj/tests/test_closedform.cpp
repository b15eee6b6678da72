#include <catch2/catch_amalgamated.hpp>

#include "kmx/closedform.hpp"

#include <cmath>
#include <random>

using namespace kmx;
using namespace kmx::closedform;
using Catch::Approx;

namespace {

double ncdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("black-scholes reference point", "[closedform]") {
    // d1 = 0.1, d2 = -0.1 at the money with r = 0: price = 100 (2 N(0.1) - 1).
    double oracle = 100.0 * (2.0 * ncdf(0.1) - 1.0);
    REQUIRE(std::fabs(oracle - 7.965567) < 5e-7);
    auto q = bs_call(100, 100, 0.0, 0.2, 1.0);
    REQUIRE(q.price == Approx(oracle).epsilon(1e-14));
    REQUIRE(q.d1 == Approx(0.1));
    REQUIRE(q.delta == Approx(ncdf(0.1)).epsilon(1e-14));
}

TEST_CASE("black-scholes parity, bounds and expiry", "[closedform]") {
    for (double S : {60.0, 100.0, 140.0}) {
        auto c = bs_call(S, 100, 0.05, 0.3, 0.7);
        auto p = bs_put(S, 100, 0.05, 0.3, 0.7);
        REQUIRE(std::fabs(c.price - p.price - (S - 100 * std::exp(-0.05 * 0.7))) < 1e-12);
        REQUIRE(c.delta >= 0.0);
        REQUIRE(c.delta <= 1.0);
        REQUIRE(c.gamma >= 0.0);
        REQUIRE(c.price >= std::max(S - 100 * std::exp(-0.05 * 0.7), 0.0));
    }
    REQUIRE(std::fabs(bs_call(105, 100, 0.05, 0.2, 1e-10).price - 5.0) < 1e-8);
    REQUIRE(std::fabs(bs_call(95, 100, 0.05, 0.2, 1e-10).price) < 1e-8);
    REQUIRE_THROWS_AS(bs_call(-1, 100, 0.0, 0.2, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bs_call(100, 100, 0.0, 0.2, 0.0), std::invalid_argument);
}

TEST_CASE("black-scholes monotone and convex", "[closedform]") {
    double prev = 0.0;
    for (double S = 50; S <= 150; S += 5) {
        double c = bs_call(S, 100, 0.03, 0.25, 0.5).price;
        REQUIRE(c > prev);
        double conv = bs_call(S + 1, 100, 0.03, 0.25, 0.5).price - 2 * c + bs_call(S - 1, 100, 0.03, 0.25, 0.5).price;
        REQUIRE(conv > 0.0);
        REQUIRE(bs_call(S, 100, 0.03, 0.26, 0.5).price > c);
        prev = c;
    }
}

TEST_CASE("symbolic black-scholes agrees with the numeric pricer", "[closedform]") {
    auto call = bs_call_symbolic(100.0, 0.05);
    auto put = bs_put_symbolic(100.0, 0.05);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uS(40, 160), uv(0.05, 0.8), uT(0.05, 2.0);
    for (int i = 0; i < 200; ++i) {
        double S = uS(rng), vol = uv(rng), T = uT(rng);
        symx::Binding b{{"S", S}, {"t", 0.0}, {"T", T}, {"eta0", vol}};
        REQUIRE(symx::evaluate(call, b) == Approx(bs_call(S, 100, 0.05, vol, T).price).epsilon(1e-12).margin(1e-12));
        REQUIRE(symx::evaluate(put, b) == Approx(bs_put(S, 100, 0.05, vol, T).price).epsilon(1e-12).margin(1e-12));
    }
    symx::Binding at{{"S", 100.0}, {"t", 0.0}, {"T", 1.0}, {"eta0", 0.2}};
    auto zero_rate = bs_call_symbolic(100.0, 0.0);
    REQUIRE(symx::evaluate(zero_rate, at) == Approx(7.965567).margin(5e-7));
    REQUIRE(symx::evaluate(symx::differentiate(call, "S", 2), at) ==
            Approx(bs_call(100, 100, 0.05, 0.2, 1.0).gamma).epsilon(1e-10));
    REQUIRE(symx::differentiate(call, "v").is_constant(0.0));
    REQUIRE(symx::evaluate(symx::differentiate(call, "eta0"), at) ==
            Approx(bs_vega(100, 100, 0.05, 0.2, 1.0)).epsilon(1e-10));
}

TEST_CASE("schwartz futures limits", "[closedform]") {
    REQUIRE(schwartz_futures(std::log(85.0), std::log(85.0), 1.0, 0.0, 0.5).F == Approx(85.0).epsilon(1e-14));
    auto inf = schwartz_futures(std::log(80.0), std::log(85.0), 1.0, 0.2, 1e3);
    REQUIRE(inf.F == Approx(std::exp(std::log(85.0) + 0.04 / 4.0)).epsilon(1e-14));
    REQUIRE(schwartz_futures(std::log(81.0), std::log(85.0), 1.0, 0.2, 0.5).F >
            schwartz_futures(std::log(80.0), std::log(85.0), 1.0, 0.2, 0.5).F);
    // Below the mean, faster reversion pulls the futures price up.
    REQUIRE(schwartz_futures(std::log(80.0), std::log(85.0), 2.0, 0.2, 0.5).F >
            schwartz_futures(std::log(80.0), std::log(85.0), 1.0, 0.2, 0.5).F);
}

TEST_CASE("schwartz futures against exact simulation of the log price", "[closedform]") {
    double x0 = std::log(80.0), alpha = std::log(85.0), kappa = 1.0, s0 = 0.2, T = 0.5;
    auto q = schwartz_futures(x0, alpha, kappa, s0, T);
    // Exact OU transition sampled in 20 steps.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    int paths = 200000, steps = 20;
    double dt = T / steps, a = std::exp(-kappa * dt), sd = s0 * std::sqrt((1 - a * a) / (2 * kappa));
    double sum = 0.0, sum2 = 0.0;
    for (int p = 0; p < paths; ++p) {
        double x = x0;
        for (int i = 0; i < steps; ++i) x = alpha + (x - alpha) * a + sd * z(rng);
        double v = std::exp(x);
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / paths, se = std::sqrt((sum2 / paths - mean * mean) / paths);
    REQUIRE(std::fabs(mean - q.F) < 1.96 * se);

    symx::Binding b{{"X", x0}, {"t", 0.0}, {"T", T}, {"sigma0", s0}};
    REQUIRE(symx::evaluate(schwartz_futures_symbolic(alpha, kappa), b) == Approx(q.F).epsilon(1e-14));
}
