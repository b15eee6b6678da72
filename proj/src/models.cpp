#include "kmx/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kmx::models {

using symx::Expression;

std::size_t SdeModel::index_of(const std::string& var) const {
    auto it = std::find(state.begin(), state.end(), var);
    if (it == state.end()) throw std::invalid_argument("model " + name + ": '" + var + "' is not a state variable");
    return static_cast<std::size_t>(it - state.begin());
}

bool SdeModel::has_state(const std::string& var) const {
    return std::find(state.begin(), state.end(), var) != state.end();
}

Matrix correlation_factor(const Matrix& c) {
    const std::size_t n = c.size();
    Matrix L(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double d = c[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= L[j][k] * L[j][k];
        if (d < -1e-12) throw std::invalid_argument("correlation matrix is not positive semi-definite");
        L[j][j] = std::sqrt(std::max(d, 0.0));
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = c[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (L[j][j] == 0.0) {
                if (std::fabs(s) > 1e-12) throw std::invalid_argument("correlation matrix is not positive semi-definite");
                L[i][j] = 0.0;
            } else {
                L[i][j] = s / L[j][j];
            }
        }
    }
    return L;
}

void validate(const SdeModel& m) {
    const std::size_t n = m.state.size();
    if (n == 0) throw std::invalid_argument("model " + m.name + ": no state variables");
    if (m.drift.size() != n) throw std::invalid_argument("model " + m.name + ": drift length mismatch");
    if (m.diffusion.size() != n) throw std::invalid_argument("model " + m.name + ": diffusion is not square");
    for (auto& row : m.diffusion)
        if (row.size() != n) throw std::invalid_argument("model " + m.name + ": diffusion is not square");
    if (m.correlation.size() != n) throw std::invalid_argument("model " + m.name + ": correlation shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (m.correlation[i].size() != n) throw std::invalid_argument("model " + m.name + ": correlation shape mismatch");
        if (m.correlation[i][i] != 1.0) throw std::invalid_argument("model " + m.name + ": correlation diagonal must be 1");
        for (std::size_t j = 0; j < n; ++j) {
            double c = m.correlation[i][j];
            if (!(std::fabs(c) <= 1.0)) throw std::invalid_argument("model " + m.name + ": correlation outside [-1, 1]");
            if (c != m.correlation[j][i]) throw std::invalid_argument("model " + m.name + ": correlation not symmetric");
        }
    }
    correlation_factor(m.correlation);
}

ExprMatrix covariance(const SdeModel& m) {
    validate(m);
    const std::size_t n = m.dim();
    Matrix L = correlation_factor(m.correlation);
    ExprMatrix B(n, std::vector<Expression>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            Expression s;
            for (std::size_t l = 0; l < n; ++l) s = s + symx::product({m.diffusion[i][l], Expression(L[l][k])});
            B[i][k] = s;
        }
    ExprMatrix cov(n, std::vector<Expression>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            Expression s;
            for (std::size_t k = 0; k < n; ++k) s = s + symx::product({B[i][k], B[j][k]});
            cov[i][j] = s;
            cov[j][i] = s;
        }
    return cov;
}

BaselineEmbedding embed_baseline(const SdeModel& true_model, const SdeModel& base) {
    validate(true_model);
    validate(base);
    const std::size_t n = true_model.dim();
    std::vector<int> src(n, -1);
    for (std::size_t j = 0; j < base.dim(); ++j) {
        if (!true_model.has_state(base.state[j]))
            throw std::invalid_argument("baseline variable '" + base.state[j] + "' is not a state of " + true_model.name);
        src[true_model.index_of(base.state[j])] = static_cast<int>(j);
    }
    BaselineEmbedding out;
    SdeModel& p = out.baseline;
    p.name = base.name;
    p.state = true_model.state;
    p.short_rate = base.short_rate;
    p.drift.assign(n, Expression());
    p.diffusion.assign(n, std::vector<Expression>(n));
    p.correlation.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        p.correlation[i][i] = 1.0;
        if (src[i] < 0) {
            out.padding.push_back(true_model.state[i]);
            continue;
        }
        p.drift[i] = base.drift[src[i]];
        for (std::size_t j = 0; j < n; ++j) {
            if (src[j] < 0) continue;
            p.diffusion[i][j] = base.diffusion[src[i]][src[j]];
            p.correlation[i][j] = base.correlation[src[i]][src[j]];
        }
    }
    return out;
}

namespace {

void check(bool ok, const std::string& model, const char* param) {
    if (!ok) throw std::invalid_argument(model + ": parameter " + param + " out of domain");
}

Matrix corr2(double rho) { return {{1.0, rho}, {rho, 1.0}}; }

}  // namespace

SdeModel heston(const HestonParams& p) {
    check(p.kappa >= 0.0, "heston", "kappa");
    check(p.theta >= 0.0, "heston", "theta");
    check(p.omega >= 0.0, "heston", "omega");
    check(std::fabs(p.rho) <= 1.0, "heston", "rho");
    check(p.v0 >= 0.0, "heston", "v0");
    check(std::isfinite(p.r), "heston", "r");
    auto S = Expression::variable("S"), v = Expression::variable("v");
    SdeModel m;
    m.name = "heston";
    m.state = {"S", "v"};
    m.drift = {p.r * S, p.kappa * (p.theta - v)};
    m.diffusion = {{symx::sqrt(v) * S, Expression()}, {Expression(), p.omega * symx::sqrt(v)}};
    m.correlation = corr2(p.rho);
    m.short_rate = Expression(p.r);
    return m;
}

SdeModel cev(const CevParams& p) {
    check(p.kappa >= 0.0, "cev", "kappa");
    check(p.theta >= 0.0, "cev", "theta");
    check(p.omega >= 0.0, "cev", "omega");
    check(std::fabs(p.rho) <= 1.0, "cev", "rho");
    check(p.v0 >= 0.0, "cev", "v0");
    check(p.gamma > 0.0, "cev", "gamma");
    check(std::isfinite(p.r), "cev", "r");
    auto S = Expression::variable("S"), v = Expression::variable("v");
    SdeModel m;
    m.name = "cev";
    m.state = {"S", "v"};
    m.drift = {p.r * S, p.kappa * (p.theta - v)};
    m.diffusion = {{symx::sqrt(v) * S, Expression()},
                   {Expression(), p.omega * symx::pow(symx::abs(v), Expression(p.gamma))}};
    m.correlation = corr2(p.rho);
    m.short_rate = Expression(p.r);
    return m;
}

SdeModel schobel_zhu(const SzParams& p) {
    check(p.kappa >= 0.0, "schobel_zhu", "kappa");
    check(p.theta >= 0.0, "schobel_zhu", "theta");
    check(p.omega >= 0.0, "schobel_zhu", "omega");
    check(std::fabs(p.rho) <= 1.0, "schobel_zhu", "rho");
    check(std::isfinite(p.sigma0), "schobel_zhu", "sigma0");
    check(std::isfinite(p.r), "schobel_zhu", "r");
    auto S = Expression::variable("S"), sig = Expression::variable("sigma");
    SdeModel m;
    m.name = "schobel_zhu";
    m.state = {"S", "sigma"};
    m.drift = {p.r * S, p.kappa * (p.theta - sig)};
    m.diffusion = {{sig * S, Expression()}, {Expression(), Expression(p.omega)}};
    m.correlation = corr2(p.rho);
    m.short_rate = Expression(p.r);
    return m;
}

SdeModel lutz_commodity(const CommodityParams& p) {
    check(p.eta > 0.0, "lutz_commodity", "eta");
    check(std::isfinite(p.alpha), "lutz_commodity", "alpha");
    check(p.kappa >= 0.0, "lutz_commodity", "kappa");
    check(p.theta >= 0.0, "lutz_commodity", "theta");
    check(p.omega >= 0.0, "lutz_commodity", "omega");
    check(std::fabs(p.rho) <= 1.0, "lutz_commodity", "rho");
    check(p.v0 >= 0.0, "lutz_commodity", "v0");
    auto X = Expression::variable("X"), v = Expression::variable("v");
    SdeModel m;
    m.name = "lutz_commodity";
    m.state = {"X", "v"};
    m.drift = {p.eta * (p.alpha - X) - 0.5 * v, p.kappa * (p.theta - v)};
    m.diffusion = {{symx::sqrt(v), Expression()}, {Expression(), p.omega * symx::sqrt(v)}};
    m.correlation = corr2(p.rho);
    m.short_rate = Expression(0.0);
    return m;
}

SdeModel black_scholes(double r, const std::string& vol_name) {
    check(std::isfinite(r), "black_scholes", "r");
    auto S = Expression::variable("S");
    SdeModel m;
    m.name = "black_scholes";
    m.state = {"S"};
    m.drift = {r * S};
    m.diffusion = {{Expression::variable(vol_name) * S}};
    m.correlation = {{1.0}};
    m.short_rate = Expression(r);
    return m;
}

SdeModel schwartz1(double kappa, double alpha, const std::string& vol_name) {
    check(kappa > 0.0, "schwartz1", "kappa");
    check(std::isfinite(alpha), "schwartz1", "alpha");
    auto X = Expression::variable("X");
    SdeModel m;
    m.name = "schwartz1";
    m.state = {"X"};
    m.drift = {kappa * (alpha - X)};
    m.diffusion = {{Expression::variable(vol_name)}};
    m.correlation = {{1.0}};
    m.short_rate = Expression(0.0);
    return m;
}

}  // namespace kmx::models
