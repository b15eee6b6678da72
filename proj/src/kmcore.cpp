#include "kmx/kmcore.hpp"

#include "kmx/closedform.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kmx::km {

using symx::Binding;
using symx::Expression;

namespace {

const char* const time_var = "t";
const char* const maturity_var = "T";

// Applies the generator repeatedly while sharing derivative memos.
class GeneratorEngine {
public:
    explicit GeneratorEngine(const models::SdeModel& m) : m_(m), cov_(models::covariance(m)), dt_(time_var) {
        for (auto& s : m.state) d_.emplace_back(s);
    }

    Expression apply(const Expression& f) {
        const std::size_t n = m_.dim();
        Expression out = dt_(f);
        std::vector<Expression> first(n);
        for (std::size_t i = 0; i < n; ++i) {
            first[i] = d_[i](f);
            out = out + m_.drift[i] * first[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                if (cov_[i][j].is_constant(0.0)) continue;
                Expression w = i == j ? 0.5 * cov_[i][j] : cov_[i][j];
                out = out + w * d_[j](first[i]);
            }
        return out;
    }

private:
    const models::SdeModel& m_;
    models::ExprMatrix cov_;
    symx::Differentiator dt_;
    std::vector<symx::Differentiator> d_;
};

void check_dims(const models::SdeModel& true_model, const models::BaselineEmbedding& base) {
    if (base.baseline.state != true_model.state)
        throw std::invalid_argument("kmcore: baseline embedding does not match the true model's state");
}

Binding at_time(Binding b, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("kmcore: tau must be positive");
    b[time_var] = 0.0;
    b[maturity_var] = tau;
    return b;
}

std::vector<double> weights(double tau, int N) {
    std::vector<double> w(N + 1);
    double p = 1.0;
    for (int n = 0; n <= N; ++n) {
        p *= tau / (n + 1);
        w[n] = p;
    }
    return w;
}

// Index of the first failing output, for error messages.
std::string locate_failure(const KmExpansion& x, const Binding& b) {
    for (std::size_t n = 0; n < x.deltas.size(); ++n) {
        try {
            symx::evaluate(x.deltas[n], b);
        } catch (const std::exception&) {
            return "delta_" + std::to_string(n);
        }
    }
    return "baseline";
}

std::vector<double> evaluate_all(const KmExpansion& x, const Binding& b) {
    try {
        return x.program->run(b);
    } catch (const symx::DomainError& e) {
        throw symx::DomainError(std::string("kmcore: evaluation failed at ") + locate_failure(x, b) + ": " + e.what(),
                                e.subexpression());
    }
}

}  // namespace

Expression generator(const models::SdeModel& m, const Expression& f) {
    GeneratorEngine g(m);
    return symx::simplify(g.apply(f));
}

Expression initial_mismatch(const models::SdeModel& true_model, const models::BaselineEmbedding& base,
                            const Expression& f0) {
    check_dims(true_model, base);
    const auto& b = base.baseline;
    const std::size_t n = true_model.dim();
    auto cov1 = models::covariance(true_model);
    auto cov0 = models::covariance(b);
    std::vector<symx::Differentiator> d;
    for (auto& s : true_model.state) d.emplace_back(s);
    Expression out;
    std::vector<Expression> first(n);
    for (std::size_t i = 0; i < n; ++i) {
        first[i] = d[i](f0);
        Expression dmu = true_model.drift[i] - b.drift[i];
        out = out + dmu * first[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            Expression dcov = cov1[i][j] - cov0[i][j];
            if (dcov.is_constant(0.0)) continue;
            Expression w = i == j ? 0.5 * dcov : dcov;
            out = out + w * d[j](first[i]);
        }
    return symx::simplify(out);
}

KmExpansion expand(const models::SdeModel& true_model, const models::BaselineEmbedding& base, const Expression& f0,
                   int N, RateMode mode) {
    if (N < 0) throw std::invalid_argument("kmcore: order must be non-negative");
    if (N > max_order)
        throw std::invalid_argument("kmcore: order " + std::to_string(N) + " exceeds the supported maximum " +
                                    std::to_string(max_order));
    check_dims(true_model, base);
    KmExpansion x;
    x.true_model = true_model;
    x.baseline = base;
    x.baseline_price = f0;
    x.rate_mode = mode;
    x.deltas.push_back(initial_mismatch(true_model, base, f0));
    GeneratorEngine g(true_model);
    Expression r = mode == RateMode::discounted ? true_model.short_rate : Expression(0.0);
    for (int n = 1; n <= N; ++n) {
        const Expression& prev = x.deltas.back();
        x.deltas.push_back(symx::simplify(g.apply(prev) - r * prev));
    }
    x.payoff_mismatch.assign(N + 1, Expression(0.0));
    std::vector<Expression> outs{f0};
    outs.insert(outs.end(), x.deltas.begin(), x.deltas.end());
    x.program = std::make_shared<symx::Program>(outs);
    return x;
}

OrderedQuote price(const KmExpansion& x, const Binding& b, double tau) {
    Binding bb = at_time(b, tau);
    auto v = evaluate_all(x, bb);
    const int N = x.order();
    auto w = weights(tau, N);
    OrderedQuote q;
    q.baseline = v[0];
    q.tau = tau;
    q.binding = bb;
    double acc = v[0];
    for (int n = 0; n <= N; ++n) {
        acc += v[n + 1] * w[n];
        q.deltas.push_back(v[n + 1]);
        q.partial.push_back(acc);
    }
    return q;
}

double fd_step(double z) {
    static const double scale = std::pow(10.0, std::log10(std::numeric_limits<double>::epsilon()) / 3.0 - 1.0);
    return (z + 1.0) * scale;
}

double greek(const KmExpansion& x, const Binding& b, double tau, const std::string& var, int order, int max_n) {
    if (order != 1 && order != 2) throw std::invalid_argument("kmcore: greek order must be 1 or 2");
    if (!x.true_model.has_state(var))
        throw std::invalid_argument("kmcore: '" + var + "' is not a state variable of " + x.true_model.name);
    const int N = max_n < 0 ? x.order() : std::min(max_n, x.order());
    Binding bb = at_time(b, tau);
    auto it = bb.find(var);
    if (it == bb.end()) throw symx::UnboundVariable(var);
    const double z = it->second;
    const double h = fd_step(z);

    double base = symx::evaluate(symx::differentiate(x.baseline_price, var, order), bb);

    Binding up = bb, dn = bb;
    up[var] = z + h;
    dn[var] = z - h;
    auto vu = evaluate_all(x, up);
    auto vd = evaluate_all(x, dn);
    std::vector<double> v0;
    if (order == 2) v0 = evaluate_all(x, bb);
    auto w = weights(tau, N);
    double out = base;
    for (int n = 0; n <= N; ++n) {
        double fd = order == 1 ? (vu[n + 1] - vd[n + 1]) / (2.0 * h) : (vu[n + 1] - 2.0 * v0[n + 1] + vd[n + 1]) / (h * h);
        out += w[n] * fd;
    }
    return out;
}

NuisanceResult optimal_nuisance(const KmExpansion& x, const Binding& b, double tau, const NuisanceOptions& opt) {
    if (!(opt.lo < opt.hi) || !(opt.tol > 0.0)) throw std::invalid_argument("kmcore: invalid nuisance bracket");
    Binding bb = at_time(b, tau);
    const int N = opt.max_n < 0 ? x.order() : std::min(opt.max_n, x.order());
    auto w = weights(tau, N);
    auto objective = [&](double eta) {
        bb[opt.var] = eta;
        auto v = evaluate_all(x, bb);
        double corr = 0.0;
        for (int n = 0; n <= N; ++n) corr += w[n] * v[n + 1];
        return corr * corr;
    };
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = opt.lo, c = opt.hi;
    double x1 = c - g * (c - a), x2 = a + g * (c - a);
    double f1 = objective(x1), f2 = objective(x2);
    int it = 0;
    while (c - a > opt.tol) {
        if (f1 <= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - g * (c - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (c - a);
            f2 = objective(x2);
        }
        ++it;
    }
    double eta = 0.5 * (a + c);
    double f = objective(eta);
    if (eta - opt.lo < 2.0 * opt.tol || opt.hi - eta < 2.0 * opt.tol) {
        std::ostringstream os;
        os.precision(10);
        os << "kmcore: no interior minimum of the nuisance objective in [" << opt.lo << ", " << opt.hi
           << "]; objective(lo) = " << objective(opt.lo) << ", objective(hi) = " << objective(opt.hi);
        throw std::runtime_error(os.str());
    }
    return {eta, f, it};
}

KmExpansion put_from_call_series(const KmExpansion& x) {
    if (!x.counterpart) throw std::invalid_argument("kmcore: expansion has no put counterpart");
    KmExpansion p = x;
    p.baseline_price = *x.counterpart;
    p.counterpart = x.baseline_price;
    std::vector<Expression> outs{p.baseline_price};
    outs.insert(outs.end(), p.deltas.begin(), p.deltas.end());
    p.program = std::make_shared<symx::Program>(outs);
    return p;
}

KmExpansion option_expansion(const models::SdeModel& true_model, double K, int N, bool call) {
    if (!true_model.short_rate.is_constant()) throw std::invalid_argument("kmcore: option expansion needs a constant rate");
    if (true_model.state.empty() || true_model.state[0] != "S")
        throw std::invalid_argument("kmcore: option expansion expects S as the first state variable");
    double r = true_model.short_rate.value();
    auto base = models::embed_baseline(true_model, models::black_scholes(r, "eta0"));
    auto c = closedform::bs_call_symbolic(Expression(K), Expression(r));
    auto p = closedform::bs_put_symbolic(Expression(K), Expression(r));
    auto x = expand(true_model, base, call ? c : p, N, RateMode::discounted);
    x.counterpart = call ? p : c;
    return x;
}

KmExpansion futures_expansion(const models::CommodityParams& p, int N) {
    auto m = models::lutz_commodity(p);
    auto base = models::embed_baseline(m, models::schwartz1(p.eta, p.alpha, "sigma0"));
    auto f0 = closedform::schwartz_futures_symbolic(Expression(p.alpha), Expression(p.eta));
    return expand(m, base, f0, N, RateMode::undiscounted);
}

Binding variance_binding(double S, double v) { return {{"S", S}, {"v", v}, {"eta0", std::sqrt(v)}}; }

Binding volatility_binding(double S, double sigma) { return {{"S", S}, {"sigma", sigma}, {"eta0", std::fabs(sigma)}}; }

Binding commodity_binding(double X, double v) { return {{"X", X}, {"v", v}, {"sigma0", std::sqrt(v)}}; }

}  // namespace kmx::km
