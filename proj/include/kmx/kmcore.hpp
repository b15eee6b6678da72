#pragma once

#include "kmx/models.hpp"
#include "kmx/symx.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kmx::km {

inline constexpr int max_order = 6;

// Options carry the -r*delta term in the recursion; futures do not.
enum class RateMode { discounted, undiscounted };

struct KmExpansion {
    models::SdeModel true_model;
    models::BaselineEmbedding baseline;
    symx::Expression baseline_price;
    std::optional<symx::Expression> counterpart;  // put seed for a call expansion and vice versa
    std::vector<symx::Expression> deltas;
    std::vector<symx::Expression> payoff_mismatch;
    RateMode rate_mode = RateMode::discounted;
    std::shared_ptr<const symx::Program> program;  // outputs: f0, delta_0..delta_N

    int order() const { return static_cast<int>(deltas.size()) - 1; }
};

struct OrderedQuote {
    double baseline;
    std::vector<double> partial;  // partial[n] = price truncated after delta_n
    std::vector<double> deltas;   // delta_n at the binding
    double tau;
    symx::Binding binding;

    double value(int n = -1) const { return n < 0 ? partial.back() : partial.at(n); }
};

// d/dt + sum mu_i d/dz_i + 1/2 sum sum (sigma sigma')_ij d2/dz_i dz_j
symx::Expression generator(const models::SdeModel& m, const symx::Expression& f);

// (L - L0) f0 for the padded baseline.
symx::Expression initial_mismatch(const models::SdeModel& true_model, const models::BaselineEmbedding& base,
                                  const symx::Expression& f0);

KmExpansion expand(const models::SdeModel& true_model, const models::BaselineEmbedding& base,
                   const symx::Expression& f0, int N, RateMode mode);

// Evaluates at calendar time t = 0 with maturity T = tau.
OrderedQuote price(const KmExpansion& x, const symx::Binding& b, double tau);

// Central-difference step used for the corrective terms.
double fd_step(double z);

// Baseline analytic derivative plus finite-difference derivatives of each
// corrective term. max_n < 0 uses every available order.
double greek(const KmExpansion& x, const symx::Binding& b, double tau, const std::string& var, int order,
             int max_n = -1);

struct NuisanceOptions {
    std::string var = "eta0";
    double lo = 1e-4;
    double hi = 2.0;
    double tol = 1e-6;
    int max_n = -1;
};

struct NuisanceResult {
    double eta;
    double objective;
    int iterations;
};

NuisanceResult optimal_nuisance(const KmExpansion& x, const symx::Binding& b, double tau,
                                const NuisanceOptions& opt = {});

KmExpansion put_from_call_series(const KmExpansion& x);

// Stochastic-volatility option expansion around Black-Scholes (nuisance eta0).
KmExpansion option_expansion(const models::SdeModel& true_model, double K, int N, bool call = true);

// Commodity futures expansion around the Schwartz one-factor model (nuisance sigma0).
KmExpansion futures_expansion(const models::CommodityParams& p, int N);

// Bindings with the nuisance matched to the spot volatility.
symx::Binding variance_binding(double S, double v);     // heston, cev
symx::Binding volatility_binding(double S, double sigma);  // schobel_zhu
symx::Binding commodity_binding(double X, double v);

}  // namespace kmx::km
