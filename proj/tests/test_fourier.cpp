#include <catch2/catch_amalgamated.hpp>

#include "kmx/closedform.hpp"
#include "kmx/fourier.hpp"

#include <cmath>
#include <numbers>

using namespace kmx;
using namespace kmx::fourier;
using Catch::Approx;

namespace {

const models::HestonParams bollerslev{0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172};
const models::SzParams sz_base{4.0, 0.2, 0.1, -0.5, 0.0953, 0.2};
// Long maturity, high vol-of-vol: the argument of Z winds several times.
const models::SzParams sz_stress{4.0, 0.2, 1.0, -0.9, 0.0, 0.2};
constexpr double stress_tau = 2.0;

// Riccati system for the exponent A + B sigma + C sigma^2 / 2, integrated by
// classical RK4 from tau = 0.
cplx sz_cf_rk4(const models::SzParams& p, double S, double tau, cplx u, int steps = 4000) {
    const cplx I{0.0, 1.0};
    cplx a = I * u;
    cplx k = p.kappa - p.rho * p.omega * a;
    double w2 = p.omega * p.omega;
    struct Y {
        cplx A, B, C;
    };
    auto f = [&](const Y& y) {
        return Y{p.kappa * p.theta * y.B + 0.5 * w2 * y.B * y.B + 0.5 * w2 * y.C,
                 p.kappa * p.theta * y.C - k * y.B + w2 * y.B * y.C, a * a - a - 2.0 * k * y.C + w2 * y.C * y.C};
    };
    auto axpy = [](const Y& y, double h, const Y& d) { return Y{y.A + h * d.A, y.B + h * d.B, y.C + h * d.C}; };
    Y y{0.0, 0.0, 0.0};
    double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        Y k1 = f(y), k2 = f(axpy(y, h / 2, k1)), k3 = f(axpy(y, h / 2, k2)), k4 = f(axpy(y, h, k3));
        y.A += h / 6 * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A);
        y.B += h / 6 * (k1.B + 2.0 * k2.B + 2.0 * k3.B + k4.B);
        y.C += h / 6 * (k1.C + 2.0 * k2.C + 2.0 * k3.C + k4.C);
    }
    return std::exp(a * (std::log(S) + p.r * tau) + y.A + y.B * p.sigma0 + 0.5 * y.C * p.sigma0 * p.sigma0);
}

double sz_price_or_estimate(const models::SzParams& p, double tau, bool corrected) {
    SzOptions o;
    o.branch_correction = corrected;
    try {
        return sz_call_ft(p, 100.0, 100.0, tau, o);
    } catch (const QuadratureError& e) {
        return e.estimate();
    }
}

}  // namespace

TEST_CASE("quadrature on known integrals", "[fourier]") {
    auto r1 = integrate_semi_infinite([](double x) { return std::exp(-x); });
    REQUIRE(std::fabs(r1.value - 1.0) < 1e-10);
    REQUIRE(std::fabs(r1.value - 1.0) <= std::max(r1.error, 1e-15));

    double exact = std::sqrt(std::numbers::pi / 2.0);
    auto r2 = integrate_semi_infinite([](double x) { return std::exp(-0.5 * x * x); });
    REQUIRE(std::fabs(r2.value - exact) < 1e-10);
    REQUIRE(std::fabs(r2.value - exact) <= std::max(r2.error, 1e-15));
}

TEST_CASE("quadrature reports non-convergence with its estimate", "[fourier]") {
    QuadratureSpec q;
    q.initial_panels = 1;
    q.max_depth = 1;
    try {
        integrate_semi_infinite([](double x) { return std::exp(-0.01 * x) * std::cos(3.0 * x); }, q);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        REQUIRE(std::isfinite(e.estimate()));
        REQUIRE(e.error() > q.abs_tol);
    }
}

TEST_CASE("heston Fourier prices on the golden spot rows", "[fourier]") {
    REQUIRE(std::fabs(heston_call_ft(bollerslev, 1000, 1000, 1.0 / 12) - 82.4766) < 1e-3);
    REQUIRE(std::fabs(heston_call_ft(bollerslev, 950, 1000, 1.0 / 12) - 57.8425) < 1e-3);
}

TEST_CASE("heston reduces to Black-Scholes without vol of vol", "[fourier]") {
    models::HestonParams p{2.0, 0.04, 0.0, -0.5, 0.1, 0.04};
    double bs = closedform::bs_call(100, 100, 0.1, 0.2, 1.0).price;
    REQUIRE(heston_call_ft(p, 100, 100, 1.0) == Approx(bs).epsilon(1e-6));
}

TEST_CASE("heston put-call parity and put bounds", "[fourier]") {
    models::HestonParams p{2.0, 0.04, 0.1, -0.5, 0.1, 0.04};
    for (double S : {80.0, 100.0, 120.0}) {
        double c = heston_call_ft(p, S, 100, 1.0);
        double put = heston_put_ft(p, S, 100, 1.0);
        REQUIRE(std::fabs(put - (c - S + 100 * std::exp(-0.1))) < 1e-8);
    }
    REQUIRE(heston_put_ft(p, 50, 100, 1.0) >= 100 * std::exp(-0.1) - 50 - 1e-6);
}

TEST_CASE("heston analytic greeks", "[fourier]") {
    auto g = heston_greeks_ft(bollerslev, 1000, 1000, 1.0 / 12);
    REQUIRE(std::fabs(100 * g.delta - 54.18) < 5e-3);
    REQUIRE(std::fabs(100 * g.gamma - 0.19246) < 5e-5);
    REQUIRE(std::fabs(g.vega - 79.3178) < 1e-2);

    // Bump-and-reprice oracle.
    double tau = 1.0 / 12, h = 0.5;
    double c0 = heston_call_ft(bollerslev, 1000, 1000, tau);
    double cu = heston_call_ft(bollerslev, 1000 + h, 1000, tau);
    double cd = heston_call_ft(bollerslev, 1000 - h, 1000, tau);
    REQUIRE((cu - cd) / (2 * h) == Approx(g.delta).epsilon(1e-5));
    REQUIRE((cu - 2 * c0 + cd) / (h * h) == Approx(g.gamma).epsilon(1e-5));
    auto up = bollerslev, dn = bollerslev;
    up.v0 += 1e-4;
    dn.v0 -= 1e-4;
    double vfd = (heston_call_ft(up, 1000, 1000, tau) - heston_call_ft(dn, 1000, 1000, tau)) / 2e-4;
    REQUIRE(vfd == Approx(g.vega).epsilon(1e-5));

    REQUIRE(std::fabs(heston_greeks_ft(bollerslev, 1e6, 1000, tau).delta - 1.0) < 1e-6);
}

TEST_CASE("corrected log", "[fourier]") {
    BranchState s;
    auto l = corrected_log({-1.0, 0.001}, s);
    REQUIRE(l.imag() == Approx(std::numbers::pi - 0.001).epsilon(1e-6));
    REQUIRE(s.k == 0);

    // One counter-clockwise turn through the four quadrants.
    BranchState turn;
    cplx last;
    for (cplx z : {cplx(1, 0.1), cplx(-0.1, 1), cplx(-1, -0.1), cplx(0.1, -1), cplx(1, 0.1)})
        last = corrected_log(z, turn);
    REQUIRE(turn.k == 1);
    REQUIRE(last.imag() == Approx(std::arg(cplx(1, 0.1)) + 2 * std::numbers::pi));

    // Against brute-force unwrapping on a dense spiral.
    BranchState dense;
    double unwrapped = 0.0;
    for (int i = 0; i <= 5000; ++i) {
        double t = 3.7 * 2 * std::numbers::pi * i / 5000.0;
        cplx z = std::polar(1.0 + 0.1 * t, t);
        auto lz = corrected_log(z, dense);
        unwrapped = t;
        REQUIRE(lz.imag() == Approx(unwrapped).margin(1e-9));
        REQUIRE(std::abs(std::exp(lz) - z) < 1e-12 * std::abs(z));
    }
}

TEST_CASE("Schobel-Zhu characteristic function solves its Riccati system", "[fourier]") {
    for (cplx u : {cplx(0.5, 0), cplx(3, 0), cplx(20, 0), cplx(1, -1), cplx(15, -1)}) {
        cplx a = sz_cf(sz_base, 100, 0.25, u, nullptr);
        cplx b = sz_cf_rk4(sz_base, 100, 0.25, u);
        REQUIRE(std::abs(a - b) < 1e-10);
    }
    // The stress set needs the rotation count: follow a monotone sweep.
    BranchState st;
    for (int i = 1; i <= 400; ++i) {
        cplx u(0.1 * i, 0.0);
        cplx a = sz_cf(sz_stress, 100, stress_tau, u, &st);
        if (i % 50 == 0) REQUIRE(std::abs(a - sz_cf_rk4(sz_stress, 100, stress_tau, u)) < 1e-9);
    }
    REQUIRE(st.k != 0);
}

TEST_CASE("Schobel-Zhu degenerate dynamics give Black-Scholes", "[fourier]") {
    // Deterministic volatility path theta + (sigma0 - theta) exp(-kappa t).
    models::SzParams p{4.0, 0.2, 0.0, -0.5, 0.0953, 0.3};
    double tau = 0.5, k = p.kappa, th = p.theta, d = p.sigma0 - p.theta;
    double var = th * th * tau + 2 * th * d * (1 - std::exp(-k * tau)) / k + d * d * (1 - std::exp(-2 * k * tau)) / (2 * k);
    double bs = closedform::bs_call(100, 100, p.r, std::sqrt(var / tau), tau).price;
    REQUIRE(std::fabs(sz_call_ft(p, 100, 100, tau) - bs) < 1e-7);

    models::SzParams fast{200.0, 0.2, 1e-4, 0.0, 0.0953, 0.2};
    REQUIRE(std::fabs(sz_call_ft(fast, 100, 100, 0.25) - closedform::bs_call(100, 100, 0.0953, 0.2, 0.25).price) <
            1e-4);
}

TEST_CASE("Schobel-Zhu correlation matters", "[fourier]") {
    auto zero = sz_base;
    zero.rho = 0.0;
    REQUIRE(std::fabs(sz_call_ft(zero, 90, 100, 0.25) - sz_call_ft(sz_base, 90, 100, 0.25)) > 1e-3);
    double c = sz_call_ft(sz_base, 100, 100, 0.25);
    REQUIRE(std::fabs(sz_put_ft(sz_base, 100, 100, 0.25) - (c - 100 + 100 * std::exp(-0.0953 * 0.25))) < 1e-8);
}

TEST_CASE("branch tracking keeps the logarithm continuous", "[fourier][branch]") {
    std::vector<double> grid;
    for (int i = 1; i <= 20000; ++i) grid.push_back(0.01 * i);
    for (const auto& [p, tau] : {std::pair{sz_base, 0.25}, std::pair{sz_stress, stress_tau}})
        for (bool shift : {false, true}) {
            auto path = sz_log_path(p, tau, grid, shift, true);
            for (std::size_t i = 1; i < path.size(); ++i) REQUIRE(std::fabs(path[i] - path[i - 1]) < std::numbers::pi);
        }
    auto raw = sz_log_path(sz_stress, stress_tau, grid, false, false);
    bool jumped = false;
    for (std::size_t i = 1; i < raw.size(); ++i) jumped |= std::fabs(raw[i] - raw[i - 1]) > std::numbers::pi;
    REQUIRE(jumped);
}

TEST_CASE("disabling the branch correction changes the stress price", "[fourier][branch]") {
    double on = sz_price_or_estimate(sz_stress, stress_tau, true);
    double off = sz_price_or_estimate(sz_stress, stress_tau, false);
    REQUIRE(std::fabs(on - off) > 1e-2);
    // Base parameters never reach the cut, so both agree there.
    REQUIRE(sz_price_or_estimate(sz_base, 0.25, true) == sz_price_or_estimate(sz_base, 0.25, false));
}
