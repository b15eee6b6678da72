#include "kmx/diagnostics.hpp"

#include "kmx/closedform.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kmx::diagnostics {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_cev(double kappa, double theta, double omega, double v) {
    if (!(kappa >= 0.0) || !(theta >= 0.0) || !(omega > 0.0))
        throw std::invalid_argument("scale density needs kappa, theta >= 0 and omega > 0");
    if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("scale density needs v > 0");
}

// Antiderivative of one term c u^p of -2 mu / sigma^2.
double power_term_closed(double c, double p, double v) {
    if (c == 0.0) return 0.0;
    if (p == -1.0) return c * std::log(v);
    return c * std::pow(v, p + 1.0) / (p + 1.0);
}

// Double-exponential rules absorb the power singularities at 0 and the slow
// decay at infinity.
double power_term_quadrature(double c, double p, double v) {
    if (c == 0.0) return 0.0;
    auto f = [=](double u) { return c * std::pow(u, p); };
    constexpr double tol = 1e-13;
    if (p < -1.0) return -boost::math::quadrature::exp_sinh<double>().integrate(f, v, inf, tol);
    if (p > -1.0) return boost::math::quadrature::tanh_sinh<double>().integrate(f, 0.0, v, tol);
    return boost::math::quadrature::tanh_sinh<double>().integrate(f, 1.0, v, tol);
}

// -2 mu / sigma^2 = a u^{-2 gamma} + b u^{1 - 2 gamma}
struct Terms {
    double a, pa, b, pb;
};

Terms scale_terms(double kappa, double theta, double omega, double gamma) {
    double w2 = omega * omega;
    return {-2.0 * kappa * theta / w2, -2.0 * gamma, 2.0 * kappa / w2, 1.0 - 2.0 * gamma};
}

// log of integral of Theta(v) dv over [lo, hi], computed in x = ln v with the
// integrand rescaled by its largest sampled value.
double log_scale_integral(double kappa, double theta, double omega, double gamma, double lo, double hi) {
    auto g = [=](double x) { return cev_log_scale_density(kappa, theta, omega, gamma, std::exp(x)) + x; };
    double a = std::log(lo), b = std::log(hi);
    double peak = -inf;
    for (int i = 0; i <= 64; ++i) peak = std::max(peak, g(a + (b - a) * i / 64.0));
    auto f = [&](double x) { return std::exp(g(x) - peak); };
    double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, 1e-10);
    return peak + std::log(I);
}

AttainabilityReport probe(double boundary, std::vector<double> logs) {
    AttainabilityReport rep{boundary, Verdict::inconclusive, std::move(logs), 0.0};
    rep.log_growth = rep.log_integrals.back() - rep.log_integrals.front();
    if (rep.log_growth > divergence_log_threshold) rep.verdict = Verdict::unattainable;
    return rep;
}

}  // namespace

FellerResult feller_check(double kappa, double theta, double omega) {
    if (kappa < 0.0 || theta < 0.0 || omega < 0.0) throw std::invalid_argument("feller_check: negative parameter");
    if (omega == 0.0) return {true, inf};
    double stat = 2.0 * kappa * theta / (omega * omega);
    return {stat >= 1.0, stat};
}

double cev_log_scale_density(double kappa, double theta, double omega, double gamma, double v) {
    require_cev(kappa, theta, omega, v);
    Terms t = scale_terms(kappa, theta, omega, gamma);
    return power_term_closed(t.a, t.pa, v) + power_term_closed(t.b, t.pb, v);
}

double cev_scale_density(double kappa, double theta, double omega, double gamma, double v) {
    return std::exp(cev_log_scale_density(kappa, theta, omega, gamma, v));
}

double cev_log_scale_quadrature(double kappa, double theta, double omega, double gamma, double v) {
    require_cev(kappa, theta, omega, v);
    Terms t = scale_terms(kappa, theta, omega, gamma);
    return power_term_quadrature(t.a, t.pa, v) + power_term_quadrature(t.b, t.pb, v);
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::attainable: return "attainable";
        case Verdict::unattainable: return "unattainable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

Attainability boundary_attainability(double kappa, double theta, double omega, double gamma) {
    if (!(gamma > 1.0)) {
        return {{0.0, Verdict::inconclusive, {}, 0.0}, {inf, Verdict::inconclusive, {}, 0.0}};
    }
    // Probes three decades towards each boundary from the reference point 1.
    std::vector<double> lower, upper;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
        // Near 0 the density is too steep for quadrature to resolve. Theta
        // decreases on (0, theta) when kappa > 0, so eps * Theta(2 eps)
        // bounds the integral from below there.
        double est = log_scale_integral(kappa, theta, omega, gamma, eps, 1.0);
        if (kappa > 0.0 && 2.0 * eps <= std::min(theta, 1.0))
            est = std::max(est, std::log(eps) + cev_log_scale_density(kappa, theta, omega, gamma, 2.0 * eps));
        lower.push_back(est);
    }
    for (double U : {1e2, 1e3, 1e4, 1e5}) upper.push_back(log_scale_integral(kappa, theta, omega, gamma, 1.0, U));
    return {probe(0.0, lower), probe(inf, upper)};
}

double percent_diff(double approx, double reference) {
    if (reference == 0.0) throw std::invalid_argument("percent_diff: zero reference");
    return (approx - reference) / reference * 100.0;
}

double bs_implied_vol(double price, double S, double K, double r, double tau) {
    double lower = std::max(0.0, S - K * std::exp(-r * tau));
    if (!(price > lower) || !(price < S)) throw std::domain_error("bs_implied_vol: price outside no-arbitrage bounds");
    auto f = [&](double vol) { return closedform::bs_call(S, K, r, vol, tau).price - price; };
    double lo = 1e-6, hi = 5.0;
    double flo = f(lo), fhi = f(hi);
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) throw std::domain_error("bs_implied_vol: price needs vol above 5");
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::fabs(b - a) <= 1e-10; };
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (a + b);
}

double parity_check(double call, double put, double S, double K, double r, double tau) {
    return call + K * std::exp(-r * tau) - put - S;
}

}  // namespace kmx::diagnostics
