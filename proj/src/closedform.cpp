#include "kmx/closedform.hpp"

#include <cmath>
#include <stdexcept>

namespace kmx::closedform {

namespace {

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string("closedform: ") + what + " must be positive");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_pdf(double x) { return 0.3989422804014327 * std::exp(-0.5 * x * x); }

BsQuote bs_call(double S, double K, double r, double vol, double tau) {
    require_positive(S, "S");
    require_positive(K, "K");
    require_positive(vol, "volatility");
    require_positive(tau, "tau");
    double sd = vol * std::sqrt(tau);
    double d1 = (std::log(S / K) + (r + 0.5 * vol * vol) * tau) / sd;
    double d2 = d1 - sd;
    double df = std::exp(-r * tau);
    double price = S * normal_cdf(d1) - K * df * normal_cdf(d2);
    return {price, d1, d2, normal_cdf(d1), normal_pdf(d1) / (S * sd)};
}

BsQuote bs_put(double S, double K, double r, double vol, double tau) {
    BsQuote q = bs_call(S, K, r, vol, tau);
    double df = std::exp(-r * tau);
    q.price = K * df * normal_cdf(-q.d2) - S * normal_cdf(-q.d1);
    q.delta = q.delta - 1.0;
    return q;
}

double bs_vega(double S, double K, double r, double vol, double tau) {
    BsQuote q = bs_call(S, K, r, vol, tau);
    return S * std::sqrt(tau) * normal_pdf(q.d1);
}

namespace {

struct BsParts {
    symx::Expression S, vol, tau, d1, d2, disc;
};

BsParts bs_parts(const symx::Expression& K, const symx::Expression& r, const BsNames& n) {
    using namespace symx;
    auto S = Expression::variable(n.S);
    auto vol = Expression::variable(n.vol);
    auto tau = Expression::variable(n.T) - Expression::variable(n.t);
    auto sd = vol * sqrt(tau);
    auto d1 = (ln(S) - ln(K) + (r + 0.5 * vol * vol) * tau) / sd;
    auto d2 = d1 - sd;
    return {S, vol, tau, d1, d2, K * exp(-(r * tau))};
}

}  // namespace

symx::Expression bs_call_symbolic(const symx::Expression& K, const symx::Expression& r, const BsNames& names) {
    auto p = bs_parts(K, r, names);
    return p.S * symx::normal_cdf(p.d1) - p.disc * symx::normal_cdf(p.d2);
}

symx::Expression bs_put_symbolic(const symx::Expression& K, const symx::Expression& r, const BsNames& names) {
    auto p = bs_parts(K, r, names);
    return p.disc * symx::normal_cdf(-p.d2) - p.S * symx::normal_cdf(-p.d1);
}

SchwartzQuote schwartz_futures(double x, double alpha, double kappa, double sigma0, double T) {
    require_positive(kappa, "kappa");
    require_positive(T, "T");
    if (!(sigma0 >= 0.0)) throw std::invalid_argument("closedform: sigma0 must be non-negative");
    double a = std::exp(-kappa * T);
    double mean = a * x + (1.0 - a) * alpha;
    double var = sigma0 * sigma0 / (2.0 * kappa) * (1.0 - a * a);
    return {std::exp(mean + 0.5 * var), mean, var};
}

symx::Expression schwartz_futures_symbolic(const symx::Expression& alpha, const symx::Expression& kappa,
                                           const SchwartzNames& names) {
    using namespace symx;
    auto X = Expression::variable(names.X);
    auto vol = Expression::variable(names.vol);
    auto tau = Expression::variable(names.T) - Expression::variable(names.t);
    auto a = exp(-(kappa * tau));
    return exp(a * X + (1.0 - a) * alpha + vol * vol / (4.0 * kappa) * (1.0 - a * a));
}

}  // namespace kmx::closedform
