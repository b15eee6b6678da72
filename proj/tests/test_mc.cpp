#include <catch2/catch_amalgamated.hpp>

#include "kmx/closedform.hpp"
#include "kmx/fourier.hpp"
#include "kmx/mc.hpp"

#include <cmath>
#include <cstring>
#include <limits>

using namespace kmx;
using namespace kmx::mc;
using Catch::Approx;

namespace {

bool identical(const McResult& a, const McResult& b) {
    return std::memcmp(&a.estimate, &b.estimate, sizeof(double)) == 0 &&
           std::memcmp(&a.std_error, &b.std_error, sizeof(double)) == 0 &&
           std::memcmp(&a.ci_lo, &b.ci_lo, sizeof(double)) == 0 && std::memcmp(&a.ci_hi, &b.ci_hi, sizeof(double)) == 0 &&
           a.negative_variance == b.negative_variance;
}

bool inside(const McResult& r, double x) { return r.ci_lo <= x && x <= r.ci_hi; }

const models::CevParams bollerslev_cev{0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172, 0.6};

}  // namespace

TEST_CASE("normal confidence interval", "[mc]") {
    auto ci = confidence_interval(0.0, 1.0, 10000, 0.95);
    REQUIRE(ci.hi == Approx(1.959964 / 100).epsilon(1e-6));
    REQUIRE(ci.lo == -ci.hi);
    auto flat = confidence_interval(5.0, 0.0, 100, 0.95);
    REQUIRE(flat.lo == 5.0);
    REQUIRE(flat.hi == 5.0);
    REQUIRE_THROWS_AS(confidence_interval(0.0, 1.0, 100, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(confidence_interval(0.0, 1.0, 1, 0.95), std::invalid_argument);
}

TEST_CASE("configuration validation", "[mc]") {
    REQUIRE_THROWS_AS(validate(McConfig{0, 100}), std::invalid_argument);
    REQUIRE_THROWS_AS(validate(McConfig{10, 1}), std::invalid_argument);
    McConfig c;
    c.level = 1.0;
    REQUIRE_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("property: fixed seed gives bit-identical results for any worker count", "[mc][property]") {
    McConfig a{100, 4000};
    a.threads = 1;
    McConfig b = a;
    b.threads = 3;
    auto r1 = simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, a);
    auto r2 = simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, a);
    auto r3 = simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, b);
    REQUIRE(identical(r1, r2));
    REQUIRE(identical(r1, r3));
    McConfig other = a;
    other.seed += 1;
    REQUIRE(simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, other).estimate != r1.estimate);
}

TEST_CASE("interval width shrinks with the square root of the path count", "[mc]") {
    McConfig small{100, 10000}, large{100, 20000};
    auto a = simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, small);
    auto b = simulate_cev_call(bollerslev_cev, 1000, 1000, 1.0 / 12, large);
    double ratio = (b.ci_hi - b.ci_lo) / (a.ci_hi - a.ci_lo);
    REQUIRE(ratio == Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("cev without vol of vol is Black-Scholes", "[mc]") {
    models::CevParams p{2.0, 0.04, 0.0, -0.5, 0.1, 0.04, 0.6};
    auto r = simulate_cev_call(p, 100, 100, 1.0, McConfig{250, 20000});
    REQUIRE(inside(r, closedform::bs_call(100, 100, 0.1, 0.2, 1.0).price));
    REQUIRE(r.negative_variance == 0);
}

TEST_CASE("cev with gamma one half brackets the Fourier heston price", "[mc]") {
    auto p = bollerslev_cev;
    p.gamma = 0.5;
    auto r = simulate_cev_call(p, 1000, 1000, 1.0 / 12);
    double ft = fourier::heston_call_ft({p.kappa, p.theta, p.omega, p.rho, p.r, p.v0}, 1000, 1000, 1.0 / 12);
    REQUIRE(inside(r, ft));
}

TEST_CASE("reflection keeps negative variances rare", "[mc]") {
    models::CevParams p{2.0, 0.04, 0.1, -0.5, 0.1, 0.04, 0.5};
    auto r = simulate_cev_call(p, 100, 100, 1.0, McConfig{500, 5000});
    REQUIRE(static_cast<double>(r.negative_variance) < 0.05 * r.total_steps);
    McConfig abs_cfg{500, 5000};
    abs_cfg.boundary = Boundary::absorbing;
    auto a = simulate_cev_call(p, 100, 100, 1.0, abs_cfg);
    REQUIRE(std::fabs(a.estimate - r.estimate) < 3 * (r.std_error + a.std_error));
}

TEST_CASE("non-finite paths are reported", "[mc]") {
    auto p = bollerslev_cev;
    try {
        simulate_cev_call(p, std::numeric_limits<double>::infinity(), 1000, 1.0 / 12, McConfig{10, 10});
        FAIL("expected PathError");
    } catch (const PathError& e) {
        REQUIRE(e.step() == 0);
    }
}

TEST_CASE("schobel-zhu simulation brackets the Fourier price", "[mc]") {
    models::SzParams p{4.0, 0.2, 0.1, -0.5, 0.0953, 0.2};
    McConfig cfg{250, 40000};
    REQUIRE(inside(simulate_sz_call(p, 100, 100, 0.25, cfg), fourier::sz_call_ft(p, 100, 100, 0.25)));
    auto zero = p;
    zero.rho = 0.0;
    REQUIRE(inside(simulate_sz_call(zero, 100, 100, 0.25, cfg), fourier::sz_call_ft(zero, 100, 100, 0.25)));
    models::SzParams flat{4.0, 0.2, 0.0, -0.5, 0.0953, 0.2};
    REQUIRE(inside(simulate_sz_call(flat, 100, 100, 0.25, cfg), closedform::bs_call(100, 100, 0.0953, 0.2, 0.25).price));
}

TEST_CASE("commodity simulation on degenerate dynamics", "[mc]") {
    double X0 = std::log(80.0), alpha = std::log(85.0), tau = 0.5;
    // No variance at all: the Euler recursion is deterministic.
    models::CommodityParams none{1.0, alpha, 1.0, 0.0, 0.0, -0.5, 0.0};
    McConfig cfg{1000, 10};
    auto r = simulate_commodity_futures(none, X0, tau, cfg);
    double euler = std::exp(alpha + (X0 - alpha) * std::pow(1.0 - tau / cfg.steps, cfg.steps));
    REQUIRE(r.estimate == Approx(euler).epsilon(1e-12));
    REQUIRE(r.ci_hi - r.ci_lo < 1e-9);
    double a = std::exp(-tau);
    REQUIRE(r.estimate == Approx(std::exp(a * X0 + (1 - a) * alpha)).epsilon(1e-5));

    // Constant variance: X is Gaussian with the -v/2 drift folded into the mean level.
    double v = 0.04;
    models::CommodityParams flat{1.0, alpha, 1.0, v, 0.0, -0.5, v};
    auto g = simulate_commodity_futures(flat, X0, tau, McConfig{1000, 50000});
    double level = alpha - 0.5 * v;
    double mean = level + (X0 - level) * a, var = v * (1 - a * a) / 2.0;
    REQUIRE(inside(g, std::exp(mean + 0.5 * var)));
}
