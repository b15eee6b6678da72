#pragma once

#include "kmx/symx.hpp"

#include <string>
#include <vector>

namespace kmx::models {

using ExprMatrix = std::vector<std::vector<symx::Expression>>;
using Matrix = std::vector<std::vector<double>>;

struct SdeModel {
    std::string name;
    std::vector<std::string> state;
    std::vector<symx::Expression> drift;
    ExprMatrix diffusion;  // before correlation mixing
    Matrix correlation;
    symx::Expression short_rate;

    std::size_t dim() const { return state.size(); }
    std::size_t index_of(const std::string& var) const;  // throws if absent
    bool has_state(const std::string& var) const;
};

// Throws std::invalid_argument when shapes or the correlation matrix are bad.
void validate(const SdeModel& m);

// Lower-triangular L with L L' = correlation.
Matrix correlation_factor(const Matrix& correlation);

// sigma L (sigma L)'.
ExprMatrix covariance(const SdeModel& m);

struct BaselineEmbedding {
    SdeModel baseline;                 // padded to the true model's state
    std::vector<std::string> padding;  // variables absent from the original baseline
};

BaselineEmbedding embed_baseline(const SdeModel& true_model, const SdeModel& base);

struct HestonParams {
    double kappa;
    double theta;
    double omega;
    double rho;
    double r;
    double v0;
};

struct CevParams {
    double kappa;
    double theta;
    double omega;
    double rho;
    double r;
    double v0;
    double gamma;
};

struct SzParams {
    double kappa;
    double theta;
    double omega;
    double rho;
    double r;
    double sigma0;  // spot volatility
};

struct CommodityParams {
    double eta;  // mean-reversion speed of the log price
    double alpha;
    double kappa;
    double theta;
    double omega;
    double rho;
    double v0;
};

// Reserved names: t (calendar time), T (maturity), eta0 / sigma0 (baseline
// nuisance volatility).
SdeModel heston(const HestonParams& p);
SdeModel cev(const CevParams& p);
SdeModel schobel_zhu(const SzParams& p);
SdeModel lutz_commodity(const CommodityParams& p);
SdeModel black_scholes(double r, const std::string& vol_name = "eta0");
SdeModel schwartz1(double kappa, double alpha, const std::string& vol_name = "sigma0");

}  // namespace kmx::models
