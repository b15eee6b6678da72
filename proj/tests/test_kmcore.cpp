#include <catch2/catch_amalgamated.hpp>

#include "kmx/closedform.hpp"
#include "kmx/kmcore.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace kmx;
using namespace kmx::symx;
using Catch::Approx;

namespace {

const models::HestonParams bollerslev{0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172};
const models::HestonParams km_base{2.0, 0.04, 0.1, -0.5, 0.1, 0.04};

const km::KmExpansion& bollerslev_expansion() {
    static const auto x = km::option_expansion(models::heston(bollerslev), 1000, 5);
    return x;
}

// Truncated power series in one variable, enough to Taylor-expand a
// Black-Scholes price in its total variance.
constexpr int jet_degree = 8;
using Jet = std::array<double, jet_degree + 1>;

Jet jet_const(double c) {
    Jet a{};
    a[0] = c;
    return a;
}

Jet jet_axpy(const Jet& a, double c, const Jet& b) {  // a + c b
    Jet r = a;
    for (int i = 0; i <= jet_degree; ++i) r[i] += c * b[i];
    return r;
}

Jet jet_mul(const Jet& a, const Jet& b) {
    Jet c{};
    for (int i = 0; i <= jet_degree; ++i)
        for (int j = 0; i + j <= jet_degree; ++j) c[i + j] += a[i] * b[j];
    return c;
}

Jet jet_exp(const Jet& a) {
    Jet b{};
    b[0] = std::exp(a[0]);
    for (int k = 1; k <= jet_degree; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += j * a[j] * b[k - j];
        b[k] = s / k;
    }
    return b;
}

Jet jet_sqrt(const Jet& a) {
    Jet b{};
    b[0] = std::sqrt(a[0]);
    for (int k = 1; k <= jet_degree; ++k) {
        double s = 0;
        for (int j = 1; j < k; ++j) s += b[j] * b[k - j];
        b[k] = (a[k] - s) / (2 * b[0]);
    }
    return b;
}

Jet jet_recip(const Jet& a) {
    Jet b{};
    b[0] = 1 / a[0];
    for (int k = 1; k <= jet_degree; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += a[j] * b[k - j];
        b[k] = -s / a[0];
    }
    return b;
}

// Phi' = phi, integrated term by term.
Jet jet_normal_cdf(const Jet& a) {
    Jet pdf = jet_exp(jet_axpy(Jet{}, -0.5, jet_mul(a, a)));
    for (double& x : pdf) x *= 0.3989422804014327;
    Jet b{};
    b[0] = 0.5 * std::erfc(-a[0] * M_SQRT1_2);
    for (int k = 1; k <= jet_degree; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += j * a[j] * pdf[k - j];
        b[k] = s / k;
    }
    return b;
}

Binding at(Binding b, double tau) {
    b["t"] = 0.0;
    b["T"] = tau;
    return b;
}

}  // namespace

TEST_CASE("generator reproduces the Black-Scholes PDE", "[kmcore]") {
    auto bs = models::black_scholes(0.05);
    auto f = closedform::bs_call_symbolic(100.0, 0.05);
    auto residual = km::generator(bs, f) - 0.05 * f;
    for (double S = 50; S <= 150; S += 10)
        for (double T : {0.1, 0.5, 2.0}) {
            double res = evaluate(residual, {{"S", S}, {"t", 0.0}, {"T", T}, {"eta0", 0.25}});
            REQUIRE(std::fabs(res) < 1e-8);
        }
    auto h = models::heston(km_base);
    auto S = Expression::variable("S");
    REQUIRE(evaluate(km::generator(h, S), {{"S", 93.0}, {"v", 0.2}}) == Approx(0.1 * 93.0));
}

TEST_CASE("generator matches a hand-assembled operator", "[kmcore]") {
    // Second-order operator of the Schobel-Zhu model written out term by term.
    models::SzParams p{4.0, 0.2, 0.1, -0.5, 0.0953, 0.2};
    auto m = models::schobel_zhu(p);
    auto f = closedform::bs_call_symbolic(100.0, p.r) * Expression::variable("sigma");
    auto d = [](const Expression& e, const char* v) { return differentiate(e, v); };
    auto S = Expression::variable("S"), sg = Expression::variable("sigma");
    auto hand = d(f, "t") + p.r * S * d(f, "S") + p.kappa * (p.theta - sg) * d(f, "sigma") +
                0.5 * sg * sg * S * S * d(d(f, "S"), "S") + p.rho * p.omega * sg * S * d(d(f, "S"), "sigma") +
                0.5 * p.omega * p.omega * d(d(f, "sigma"), "sigma");
    Binding b{{"S", 95.0}, {"sigma", 0.27}, {"t", 0.0}, {"T", 0.4}, {"eta0", 0.22}};
    REQUIRE(evaluate(km::generator(m, f), b) == Approx(evaluate(hand, b)).epsilon(1e-12));
}

TEST_CASE("initial mismatch has the convexity form", "[kmcore]") {
    auto h = models::heston(km_base);
    auto f0 = closedform::bs_call_symbolic(100.0, km_base.r);
    auto d0 = km::initial_mismatch(h, models::embed_baseline(h, models::black_scholes(km_base.r)), f0);
    for (double v : {0.01, 0.04, 0.3}) {
        double S = 104, eta = 0.18, T = 0.75;
        double gamma = closedform::bs_call(S, 100, km_base.r, eta, T).gamma;
        double expect = 0.5 * (v - eta * eta) * S * S * gamma;
        REQUIRE(evaluate(d0, {{"S", S}, {"v", v}, {"t", 0.0}, {"T", T}, {"eta0", eta}}) ==
                Approx(expect).epsilon(1e-12).margin(1e-14));
    }

    models::CommodityParams cp{1.0, std::log(85.0), 1.0, 0.05, 0.2, -0.5, 0.04};
    auto lutz = models::lutz_commodity(cp);
    auto F0 = closedform::schwartz_futures_symbolic(cp.alpha, cp.eta);
    auto dc = km::initial_mismatch(lutz, models::embed_baseline(lutz, models::schwartz1(cp.eta, cp.alpha)), F0);
    double X = std::log(80.0), v = 0.05, s0 = 0.2, T = 0.5;
    double F = closedform::schwartz_futures(X, cp.alpha, cp.eta, s0, T).F;
    double a = std::exp(-cp.eta * T);
    double expect = 0.5 * (v - s0 * s0) * a * a * F - 0.5 * v * a * F;
    REQUIRE(evaluate(dc, {{"X", X}, {"v", v}, {"t", 0.0}, {"T", T}, {"sigma0", s0}}) == Approx(expect).epsilon(1e-12));

    REQUIRE(km::initial_mismatch(h, models::embed_baseline(h, h), f0).is_constant(0.0));
}

TEST_CASE("first corrective term vanishes at the spot-matched nuisance", "[kmcore]") {
    std::vector<std::pair<km::KmExpansion, Binding>> cases{
        {km::option_expansion(models::heston(km_base), 100, 1), km::variance_binding(97, 0.04)},
        {km::option_expansion(models::cev({2.0, 0.04, 0.1, -0.5, 0.1, 0.04, 1.33}), 100, 1),
         km::variance_binding(103, 0.09)},
        {km::option_expansion(models::schobel_zhu({4.0, 0.2, 0.1, -0.5, 0.0953, 0.2}), 100, 1),
         km::volatility_binding(100, 0.23)},
    };
    for (auto& [x, b] : cases) {
        auto q = km::price(x, b, 0.5);
        REQUIRE(std::fabs(q.deltas[0]) < 1e-12);
        REQUIRE(q.partial[0] == Approx(q.baseline).epsilon(1e-12));
    }
}

TEST_CASE("golden heston values at order four", "[kmcore][golden]") {
    const auto& x = bollerslev_expansion();
    double tau = 1.0 / 12;
    REQUIRE(std::fabs(km::price(x, km::variance_binding(1000, bollerslev.v0), tau).value(4) - 82.4797) < 2e-3);
    REQUIRE(std::fabs(km::price(x, km::variance_binding(950, bollerslev.v0), tau).value(4) - 57.8449) < 2e-3);

    auto b = km::variance_binding(1000, bollerslev.v0);
    REQUIRE(std::fabs(100 * km::greek(x, b, tau, "S", 1, 4) - 54.1801) < 5e-3);
    REQUIRE(std::fabs(100 * km::greek(x, b, tau, "S", 2, 4) - 0.19241) < 5e-4);
    REQUIRE(std::fabs(km::greek(x, b, tau, "v", 1, 4) - 79.3229) < 1e-2);
}

TEST_CASE("partial sums follow the series recurrence", "[kmcore]") {
    const auto& x = bollerslev_expansion();
    for (double tau : {1.0 / 12, 0.5}) {
        auto q = km::price(x, km::variance_binding(1030, 0.3), tau);
        double w = 1.0, prev = q.baseline;
        for (int n = 0; n <= x.order(); ++n) {
            w *= tau / (n + 1);
            REQUIRE(q.partial[n] == Approx(prev + q.deltas[n] * w).epsilon(1e-13));
            prev = q.partial[n];
        }
    }
    auto tiny = km::price(x, km::variance_binding(1000, 0.2), 1e-9);
    REQUIRE(tiny.value() == Approx(tiny.baseline).epsilon(1e-9));
    REQUIRE_THROWS_AS(km::price(x, km::variance_binding(1000, 0.2), 0.0), std::invalid_argument);
}

TEST_CASE("cev with gamma one half reproduces the heston series", "[kmcore][property]") {
    auto cevx = km::option_expansion(models::cev({2.0, 0.04, 0.3, -0.5, 0.1, 0.04, 0.5}), 100, 5);
    auto hx = km::option_expansion(models::heston({2.0, 0.04, 0.3, -0.5, 0.1, 0.04}), 100, 5);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> uS(80, 120), uv(0.01, 0.2);
    for (int i = 0; i < 20; ++i) {
        auto b = km::variance_binding(uS(rng), uv(rng));
        auto qc = km::price(cevx, b, 0.5), qh = km::price(hx, b, 0.5);
        for (int n = 0; n <= 5; ++n) REQUIRE(qc.partial[n] == Approx(qh.partial[n]).epsilon(1e-10));
    }
}

TEST_CASE("finite-difference greeks agree with symbolic derivatives of each term", "[kmcore]") {
    const auto& x = bollerslev_expansion();
    Binding b = at(km::variance_binding(1010, 0.45), 1.0 / 12);
    for (int n = 0; n <= 3; ++n) {
        for (const char* var : {"S", "v"}) {
            double h = km::fd_step(b.at(var));
            auto up = b, dn = b;
            up[var] += h;
            dn[var] -= h;
            double fd = (evaluate(x.deltas[n], up) - evaluate(x.deltas[n], dn)) / (2 * h);
            double sym = evaluate(differentiate(x.deltas[n], var), b);
            REQUIRE(fd == Approx(sym).epsilon(1e-5).margin(1e-9));
        }
    }
    REQUIRE(km::fd_step(0.0) == Approx(std::pow(10.0, std::log10(std::numeric_limits<double>::epsilon()) / 3 - 1)));
    REQUIRE_THROWS_AS(km::greek(x, km::variance_binding(1000, 0.5), 0.1, "q", 1), std::invalid_argument);
}

TEST_CASE("undiscounted recursion equals the discounted one at zero rate", "[kmcore]") {
    auto h = models::heston({2.0, 0.04, 0.1, -0.5, 0.0, 0.04});
    auto emb = models::embed_baseline(h, models::black_scholes(0.0));
    auto f0 = closedform::bs_call_symbolic(100.0, 0.0);
    auto a = km::expand(h, emb, f0, 3, km::RateMode::discounted);
    auto u = km::expand(h, emb, f0, 3, km::RateMode::undiscounted);
    auto b = at(km::variance_binding(95, 0.06), 0.7);
    for (int n = 0; n <= 3; ++n) REQUIRE(evaluate(a.deltas[n], b) == evaluate(u.deltas[n], b));
}

TEST_CASE("put series from the call series", "[kmcore]") {
    auto call = km::option_expansion(models::heston(km_base), 100, 5);
    auto put = km::put_from_call_series(call);
    REQUIRE(put.deltas.size() == call.deltas.size());
    for (std::size_t n = 0; n < put.deltas.size(); ++n) REQUIRE(put.deltas[n].same(call.deltas[n]));
    for (double S : {70.0, 100.0, 130.0}) {
        auto b = km::variance_binding(S, 0.04);
        auto qc = km::price(call, b, 1.0), qp = km::price(put, b, 1.0);
        for (int n = 0; n <= 5; ++n)
            REQUIRE(std::fabs(qp.partial[n] - (qc.partial[n] + 100 * std::exp(-0.1) - S)) < 1e-10);
    }
    auto qp = km::price(put, km::variance_binding(90, 0.04), 1e-9);
    REQUIRE(qp.value() == Approx(closedform::bs_put(90, 100, 0.1, 0.2, 1e-9).price).margin(1e-9));
}

TEST_CASE("optimal nuisance on degenerate and matched cases", "[kmcore]") {
    auto flat = km::option_expansion(models::heston({2.0, 0.04, 0.0, -0.5, 0.1, 0.04}), 100, 3);
    auto r = km::optimal_nuisance(flat, {{"S", 100.0}, {"v", 0.04}}, 1.0);
    REQUIRE(r.eta == Approx(0.2).margin(1e-5));
    REQUIRE(r.objective < 1e-10);  // eta is located to 1e-6

    auto x0 = km::option_expansion(models::heston(km_base), 100, 0);
    auto b = km::variance_binding(100, 0.04);
    auto q = km::price(x0, b, 1.0);
    REQUIRE(q.value() == q.baseline);
}

TEST_CASE("order limits", "[kmcore]") {
    REQUIRE_THROWS_AS(km::option_expansion(models::heston(km_base), 100, km::max_order + 1), std::invalid_argument);
    REQUIRE_THROWS_AS(km::option_expansion(models::heston(km_base), 100, -1), std::invalid_argument);
}

// With omega = 0 the variance is deterministic and the order-N partial sum is
// the degree N+1 Taylor polynomial, at s = tau, of
//   psi(s) = exp(-r s) E[f0(s, X_s)] = BS price with total variance W(s) + eta0^2 (tau - s),
// W(s) the integrated variance over [0, s]. The jets give those coefficients
// without any symbolic machinery.
TEST_CASE("series equals the Taylor polynomial of the baseline semigroup", "[kmcore]") {
    const double kappa = 2.0, theta = 0.04, v0 = 0.09, r = 0.1, K = 100, tau = 1.0, eta = 0.25;
    auto x = km::option_expansion(models::heston({kappa, theta, 0.0, -0.5, r, v0}), K, 6);
    for (double S : {80.0, 100.0, 120.0}) {
        Jet s{};
        s[1] = 1.0;
        Jet decay = jet_axpy(jet_const(1.0), -1.0, jet_exp(jet_axpy(Jet{}, -kappa, s)));
        Jet W = jet_axpy(jet_axpy(Jet{}, theta, s), (v0 - theta) / kappa, decay);
        Jet V = jet_axpy(W, eta * eta, jet_axpy(jet_const(tau), -1.0, s));
        Jet sd = jet_sqrt(V);
        Jet d1 = jet_mul(jet_axpy(jet_const(std::log(S / K) + r * tau), 0.5, V), jet_recip(sd));
        Jet d2 = jet_axpy(d1, -1.0, sd);
        Jet psi = jet_axpy(Jet{}, S, jet_normal_cdf(d1));
        psi = jet_axpy(psi, -K * std::exp(-r * tau), jet_normal_cdf(d2));

        auto b = km::variance_binding(S, v0);
        b["eta0"] = eta;
        auto q = km::price(x, b, tau);
        double poly = psi[0], pw = 1.0;
        for (int n = 0; n <= 6; ++n) {
            pw *= tau;
            poly += psi[n + 1] * pw;
            INFO("S " << S << " order " << n);
            REQUIRE(q.value(n) == Approx(poly).epsilon(1e-11));
        }
    }
}
