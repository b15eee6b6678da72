#include "commands.hpp"

#include "golden.hpp"
#include "kmx/closedform.hpp"
#include "kmx/diagnostics.hpp"
#include "kmx/fourier.hpp"
#include "kmx/kmcore.hpp"
#include "kmx/mc.hpp"
#include "kmx/symx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kmx::tools {

namespace {

std::string num(double x) { return format_number(x); }

[[noreturn]] void unsupported(const QuoteRequest& q, const std::string& what) {
    throw std::invalid_argument(what + " is not available for model " + q.model + " with method " + q.method);
}

// Everything a subcommand needs about one model and contract.
struct Setup {
    std::string model;
    double S, K, tau;
    int order;
    models::HestonParams heston{};
    models::CevParams cev{};
    models::SzParams sz{};
    models::CommodityParams com{};
    double bs_vol = 0.2, bs_r = 0.05;

    std::vector<std::pair<std::string, std::string>> echo() const {
        std::vector<std::pair<std::string, std::string>> m{{"model", model}};
        auto add = [&](const char* k, double v) { m.emplace_back(k, num(v)); };
        if (model == "heston" || model == "cev") {
            const auto& h = heston;
            add("kappa", h.kappa), add("theta", h.theta), add("omega", h.omega), add("rho", h.rho), add("r", h.r);
            add("v0", h.v0);
            if (model == "cev") add("gamma", cev.gamma);
        } else if (model == "sz") {
            add("kappa", sz.kappa), add("theta", sz.theta), add("omega", sz.omega), add("rho", sz.rho), add("r", sz.r);
            add("sigma0", sz.sigma0);
        } else if (model == "commodity") {
            add("eta", com.eta), add("alpha", com.alpha), add("kappa", com.kappa), add("theta", com.theta);
            add("omega", com.omega), add("rho", com.rho), add("v0", com.v0);
        } else {
            add("vol", bs_vol), add("r", bs_r);
        }
        add("S", S);
        if (model != "commodity") add("K", K);
        add("tau", tau);
        return m;
    }
};

Setup make_setup(const QuoteRequest& q) {
    const Config& c = q.settings;
    Setup s;
    s.model = q.model;
    if (q.model == "heston" || q.model == "cev") {
        const auto& g = golden::bollerslev;
        s.heston = {c.number("kappa", g.kappa), c.number("theta", g.theta), c.number("omega", g.omega),
                    c.number("rho", g.rho),     c.number("r", g.r),         c.number("v0", g.v0)};
        const auto& h = s.heston;
        s.cev = {h.kappa, h.theta, h.omega, h.rho, h.r, h.v0, q.model == "cev" ? c.number("gamma", 0.6) : 0.5};
        s.S = c.number("S", golden::bollerslev_K);
        s.K = c.number("K", golden::bollerslev_K);
        s.tau = c.number("tau", golden::bollerslev_tau);
        s.order = q.order >= 0 ? q.order : golden::heston_order;
    } else if (q.model == "sz") {
        const auto& g = golden::sz_params;
        s.sz = {c.number("kappa", g.kappa), c.number("theta", g.theta), c.number("omega", g.omega),
                c.number("rho", g.rho),     c.number("r", g.r),         c.number("sigma0", g.sigma0)};
        s.S = c.number("S", golden::sz_K);
        s.K = c.number("K", golden::sz_K);
        s.tau = c.number("tau", golden::sz_tau);
        s.order = q.order >= 0 ? q.order : golden::sz_order;
    } else if (q.model == "commodity") {
        auto g = golden::lutz_params();
        s.com = {c.number("eta", g.eta),     c.number("alpha", g.alpha), c.number("kappa", g.kappa),
                 c.number("theta", g.theta), c.number("omega", g.omega), c.number("rho", g.rho),
                 c.number("v0", g.v0)};
        s.S = c.number("S", golden::lutz_S);
        s.K = 0.0;
        s.tau = c.number("tau", 0.5);
        s.order = q.order >= 0 ? q.order : 4;
    } else if (q.model == "bs") {
        s.bs_vol = c.number("vol", 0.2);
        s.bs_r = c.number("r", 0.05);
        s.S = c.number("S", 100);
        s.K = c.number("K", 100);
        s.tau = c.number("tau", 1.0);
        s.order = 0;
    } else {
        throw std::invalid_argument("unknown model " + q.model + " (heston, cev, sz, commodity, bs)");
    }
    if (s.order > km::max_order) throw std::invalid_argument("order above " + std::to_string(km::max_order));
    return s;
}

void reject_unused(const Config& c) {
    auto extra = c.unused();
    if (extra.empty()) return;
    std::string list;
    for (const auto& k : extra) list += (list.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unused settings: " + list);
}

km::KmExpansion expansion(const Setup& s) {
    if (s.model == "heston") return km::option_expansion(models::heston(s.heston), s.K, s.order);
    if (s.model == "cev") return km::option_expansion(models::cev(s.cev), s.K, s.order);
    if (s.model == "sz") return km::option_expansion(models::schobel_zhu(s.sz), s.K, s.order);
    if (s.model == "commodity") return km::futures_expansion(s.com, s.order);
    throw std::invalid_argument("no expansion for model " + s.model);
}

symx::Binding binding(const Setup& s, const Config& c) {
    symx::Binding b;
    std::string nuisance = "eta0";
    if (s.model == "heston" || s.model == "cev") b = km::variance_binding(s.S, s.heston.v0);
    else if (s.model == "sz") b = km::volatility_binding(s.S, s.sz.sigma0);
    else b = km::commodity_binding(std::log(s.S), s.com.v0), nuisance = "sigma0";
    if (c.has("eta0")) b[nuisance] = c.number("eta0");
    return b;
}

mc::McConfig mc_settings(const QuoteRequest& q, int steps, long paths) {
    const Config& c = q.settings;
    mc::McConfig m;
    m.steps = static_cast<int>(c.integer("steps", steps));
    m.paths = static_cast<long>(c.integer("paths", paths));
    m.seed = q.seed;
    m.threads = q.threads;
    m.level = c.number("level", 0.95);
    std::string scheme = c.text("scheme", "milstein"), boundary = c.text("boundary", "reflective");
    if (scheme == "euler") m.scheme = mc::Scheme::euler;
    else if (scheme != "milstein") throw std::invalid_argument("scheme must be milstein or euler");
    if (boundary == "absorbing") m.boundary = mc::Boundary::absorbing;
    else if (boundary != "reflective") throw std::invalid_argument("boundary must be reflective or absorbing");
    return m;
}

mc::McResult simulate(const QuoteRequest& q, const Setup& s) {
    if (s.model == "heston" || s.model == "cev") return mc::simulate_cev_call(s.cev, s.S, s.K, s.tau, mc_settings(q, 500, 20000));
    if (s.model == "sz") return mc::simulate_sz_call(s.sz, s.S, s.K, s.tau, mc_settings(q, 500, 20000));
    if (s.model == "commodity")
        return mc::simulate_commodity_futures(s.com, std::log(s.S), s.tau, mc_settings(q, 1000, 200000));
    unsupported(q, "simulation");
}

void add_mc_meta(std::vector<std::pair<std::string, std::string>>& meta, const mc::McResult& r, std::uint64_t seed) {
    meta.insert(meta.end(), {{"steps", std::to_string(r.config.steps)},
                             {"paths", std::to_string(r.config.paths)},
                             {"seed", std::to_string(seed)},
                             {"scheme", r.config.scheme == mc::Scheme::milstein ? "milstein" : "euler"},
                             {"boundary", r.config.boundary == mc::Boundary::reflective ? "reflective" : "absorbing"},
                             {"level", num(r.config.level)}});
}

}  // namespace

CommandOutput price_command(const QuoteRequest& q) {
    Setup s = make_setup(q);
    CommandOutput out;
    auto& t = out.table;
    if (q.method == "km") {
        if (s.model == "bs") unsupported(q, "the expansion");
        auto x = expansion(s);
        auto b = binding(s, q.settings);
        reject_unused(q.settings);
        auto r = km::price(x, b, s.tau);
        t.columns = {"price"};
        for (int n = 0; n <= s.order; ++n) t.columns.push_back("km_" + std::to_string(n));
        std::vector<Cell> row{r.value()};
        for (double v : r.partial) row.push_back(v);
        t.add(std::move(row));
        out.meta = s.echo();
        out.meta.push_back({"order", std::to_string(s.order)});
    } else if (q.method == "ft") {
        reject_unused(q.settings);
        double p;
        if (s.model == "heston") p = fourier::heston_call_ft(s.heston, s.S, s.K, s.tau);
        else if (s.model == "sz") p = fourier::sz_call_ft(s.sz, s.S, s.K, s.tau);
        else if (s.model == "cev" && s.cev.gamma == 0.5) p = fourier::heston_call_ft(s.heston, s.S, s.K, s.tau);
        else unsupported(q, "the transform price");
        t.columns = {"price"};
        t.add({p});
        out.meta = s.echo();
    } else if (q.method == "mc") {
        auto r = simulate(q, s);
        reject_unused(q.settings);
        t.columns = {"price", "std_error", "ci_lo", "ci_hi"};
        t.add({r.estimate, r.std_error, r.ci_lo, r.ci_hi});
        out.meta = s.echo();
        add_mc_meta(out.meta, r, q.seed);
    } else if (q.method == "closed") {
        reject_unused(q.settings);
        if (s.model != "bs") unsupported(q, "a closed-form price");
        t.columns = {"price"};
        t.add({closedform::bs_call(s.S, s.K, s.bs_r, s.bs_vol, s.tau).price});
        out.meta = s.echo();
    } else {
        throw std::invalid_argument("method must be km, ft, mc or closed");
    }
    out.meta.insert(out.meta.begin(), {"method", q.method});
    return out;
}

CommandOutput greeks_command(const QuoteRequest& q) {
    Setup s = make_setup(q);
    CommandOutput out;
    auto& t = out.table;
    t.columns = {"delta", "gamma", "vega"};
    if (q.method == "km") {
        if (s.model == "bs" || s.model == "commodity") unsupported(q, "option greeks");
        auto x = expansion(s);
        auto b = binding(s, q.settings);
        reject_unused(q.settings);
        std::string vol = s.model == "sz" ? "sigma" : "v";
        t.add({km::greek(x, b, s.tau, "S", 1), km::greek(x, b, s.tau, "S", 2), km::greek(x, b, s.tau, vol, 1)});
        out.meta = s.echo();
        out.meta.push_back({"order", std::to_string(s.order)});
    } else if (q.method == "ft") {
        reject_unused(q.settings);
        if (s.model == "heston") {
            auto g = fourier::heston_greeks_ft(s.heston, s.S, s.K, s.tau);
            t.add({g.delta, g.gamma, g.vega});
        } else if (s.model == "sz") {
            // Central differences of the transform price.
            auto f = [&](double S, double sigma) {
                auto p = s.sz;
                p.sigma0 = sigma;
                return fourier::sz_call_ft(p, S, s.K, s.tau);
            };
            double h = 1e-3 * s.S, k = 1e-4, c0 = f(s.S, s.sz.sigma0);
            double up = f(s.S + h, s.sz.sigma0), dn = f(s.S - h, s.sz.sigma0);
            t.add({(up - dn) / (2 * h), (up - 2 * c0 + dn) / (h * h),
                   (f(s.S, s.sz.sigma0 + k) - f(s.S, s.sz.sigma0 - k)) / (2 * k)});
        } else {
            unsupported(q, "transform greeks");
        }
        out.meta = s.echo();
    } else if (q.method == "closed") {
        reject_unused(q.settings);
        if (s.model != "bs") unsupported(q, "closed-form greeks");
        auto g = closedform::bs_call(s.S, s.K, s.bs_r, s.bs_vol, s.tau);
        t.add({g.delta, g.gamma, closedform::bs_vega(s.S, s.K, s.bs_r, s.bs_vol, s.tau)});
        out.meta = s.echo();
    } else {
        throw std::invalid_argument("greeks support methods km, ft and closed");
    }
    out.meta.insert(out.meta.begin(), {"method", q.method});
    return out;
}

CommandOutput mc_command(const QuoteRequest& q) {
    Setup s = make_setup(q);
    auto r = simulate(q, s);
    reject_unused(q.settings);
    CommandOutput out;
    out.table.columns = {"estimate", "std_error", "ci_lo", "ci_hi", "negative_variance", "total_steps"};
    out.table.add({r.estimate, r.std_error, r.ci_lo, r.ci_hi, static_cast<long long>(r.negative_variance),
                   static_cast<long long>(r.total_steps)});
    out.meta = s.echo();
    add_mc_meta(out.meta, r, q.seed);
    return out;
}

CommandOutput diagnose_command(const QuoteRequest& q) {
    Setup s = make_setup(q);
    if (s.model == "bs" || s.model == "commodity") throw std::invalid_argument("diagnose covers heston, cev and sz");
    auto x = expansion(s);
    auto b = binding(s, q.settings);
    reject_unused(q.settings);

    CommandOutput out;
    auto& t = out.table;
    t.columns = {"item", "value", "detail"};
    double r = s.model == "sz" ? s.sz.r : s.heston.r;

    if (s.model != "sz") {
        auto f = diagnostics::feller_check(s.heston.kappa, s.heston.theta, s.heston.omega);
        t.add({std::string("feller_statistic"), f.statistic,
               std::string(f.satisfied ? "satisfied (2 kappa theta / omega^2 >= 1)" : "violated")});
    }
    if (s.model == "cev") {
        const auto& c = s.cev;
        t.add({std::string("log_scale_density_v0"),
               diagnostics::cev_log_scale_density(c.kappa, c.theta, c.omega, c.gamma, c.v0), std::string("")});
        auto a = diagnostics::boundary_attainability(c.kappa, c.theta, c.omega, c.gamma);
        t.add({std::string("boundary_0"), a.lower.log_growth, diagnostics::verdict_name(a.lower.verdict)});
        t.add({std::string("boundary_inf"), a.upper.log_growth, diagnostics::verdict_name(a.upper.verdict)});
    }

    auto call = km::price(x, b, s.tau).value();
    auto put = km::price(km::put_from_call_series(x), b, s.tau).value();
    t.add({std::string("km_call"), call, "order " + std::to_string(s.order)});
    t.add({std::string("km_parity_residual"), diagnostics::parity_check(call, put, s.S, s.K, r, s.tau),
           std::string("call + K exp(-r tau) - put - S")});

    double ref_call = std::nan(""), ref_put = std::nan("");
    if (s.model == "heston" || (s.model == "cev" && s.cev.gamma == 0.5)) {
        ref_call = fourier::heston_call_ft(s.heston, s.S, s.K, s.tau);
        ref_put = fourier::heston_put_ft(s.heston, s.S, s.K, s.tau);
    } else if (s.model == "sz") {
        ref_call = fourier::sz_call_ft(s.sz, s.S, s.K, s.tau);
        ref_put = fourier::sz_put_ft(s.sz, s.S, s.K, s.tau);
    }
    if (std::isfinite(ref_call)) {
        t.add({std::string("ft_call"), ref_call, std::string("")});
        t.add({std::string("ft_parity_residual"), diagnostics::parity_check(ref_call, ref_put, s.S, s.K, r, s.tau),
               std::string("")});
        t.add({std::string("percent_diff"), diagnostics::percent_diff(call, ref_call), std::string("km vs ft")});
        t.add({std::string("implied_vol_ft"), diagnostics::bs_implied_vol(ref_call, s.S, s.K, r, s.tau),
               std::string("")});
    }
    t.add({std::string("implied_vol_km"), diagnostics::bs_implied_vol(call, s.S, s.K, r, s.tau), std::string("")});
    out.meta = s.echo();
    out.meta.push_back({"order", std::to_string(s.order)});
    return out;
}

CommandOutput expand_command(const QuoteRequest& q, bool dump) {
    Setup s = make_setup(q);
    auto x = expansion(s);
    reject_unused(q.settings);
    CommandOutput out;
    auto& t = out.table;
    t.columns = {"n", "tree_nodes", "dag_nodes"};
    if (dump) t.columns.push_back("expression");
    for (int n = 0; n <= x.order(); ++n) {
        const auto& d = x.deltas[n];
        auto tree = std::min<std::uint64_t>(symx::node_count(d), std::numeric_limits<long long>::max());
        std::vector<Cell> row{static_cast<long long>(n), static_cast<long long>(tree),
                              static_cast<long long>(symx::dag_size(d))};
        if (dump) row.push_back(symx::to_string(d));
        t.add(std::move(row));
    }
    out.meta = s.echo();
    out.meta.push_back({"order", std::to_string(s.order)});
    return out;
}

}  // namespace kmx::tools
