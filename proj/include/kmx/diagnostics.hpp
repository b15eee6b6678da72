#pragma once

#include <string>
#include <vector>

namespace kmx::diagnostics {

struct FellerResult {
    bool satisfied;
    double statistic;  // 2 kappa theta / omega^2, +inf when omega = 0
};

FellerResult feller_check(double kappa, double theta, double omega);

// Scale density of dv = kappa (theta - v) dt + omega v^gamma dW, normalised
// so that the antiderivative of -2 mu / sigma^2 has no additive constant.
// gamma = 1/2 and gamma = 1 use the logarithmic antiderivatives.
double cev_log_scale_density(double kappa, double theta, double omega, double gamma, double v);
double cev_scale_density(double kappa, double theta, double omega, double gamma, double v);

// Same quantity by adaptive quadrature of the two power-law terms of
// -2 mu / sigma^2, each integrated from the end where its antiderivative
// vanishes (0, 1 or infinity).
double cev_log_scale_quadrature(double kappa, double theta, double omega, double gamma, double v);

enum class Verdict { attainable, unattainable, inconclusive };
std::string verdict_name(Verdict v);

struct AttainabilityReport {
    double boundary;  // 0 or +inf
    Verdict verdict;
    // log of the scale integral (or a lower bound for it) at the probe
    // points, ordered towards the boundary
    std::vector<double> log_integrals;
    double log_growth;  // last minus first
};

// Evidence threshold: the scale integral must grow by more than this factor
// in log terms (ln 100) while the probe moves three decades towards the
// boundary.
inline constexpr double divergence_log_threshold = 4.605170185988092;

struct Attainability {
    AttainabilityReport lower;
    AttainabilityReport upper;
};

Attainability boundary_attainability(double kappa, double theta, double omega, double gamma);

// (approx - reference) / reference * 100
double percent_diff(double approx, double reference);

// Brent-style root of the Black-Scholes call price on vol in [1e-6, 5].
double bs_implied_vol(double price, double S, double K, double r, double tau);

// call + K e^{-r tau} - put - S
double parity_check(double call, double put, double S, double K, double r, double tau);

}  // namespace kmx::diagnostics
