#include "experiments.hpp"

#include "golden.hpp"
#include "kmx/closedform.hpp"
#include "kmx/diagnostics.hpp"
#include "kmx/fourier.hpp"
#include "kmx/kmcore.hpp"
#include "kmx/mc.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kmx::tools {

Check within(std::string name, double got, double want, double tol, bool gating) {
    std::ostringstream d;
    d << "got " << format_number(got) << " want " << format_number(want) << " tol " << format_number(tol);
    return {std::move(name), std::fabs(got - want) <= tol, d.str(), gating};
}

Check holds(std::string name, bool ok, std::string detail, bool gating) {
    return {std::move(name), ok, std::move(detail), gating};
}

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.gating; });
}

namespace {

using diagnostics::percent_diff;

std::string num(double x) { return format_number(x); }

std::vector<std::string> order_columns(const std::string& prefix, int max_order) {
    std::vector<std::string> out;
    for (int n = 0; n <= max_order; ++n) out.push_back(prefix + std::to_string(n));
    return out;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (int i = 0;; ++i) {
        double x = lo + i * step;
        if (x > hi + 1e-9 * step) break;
        g.push_back(x);
    }
    return g;
}

std::vector<double> spot_grid(const Config& s, double lo, double hi, double step) {
    return grid(s.number("S_min", lo), s.number("S_max", hi), s.number("S_step", step));
}

mc::McConfig mc_config(const RunOptions& o, int steps, long paths) {
    mc::McConfig c;
    c.steps = static_cast<int>(o.settings.integer("steps", steps));
    c.paths = static_cast<long>(o.settings.integer("paths", paths));
    c.seed = o.seed;
    c.threads = o.threads;
    return c;
}

std::vector<std::pair<std::string, std::string>> heston_echo(const models::HestonParams& p) {
    return {{"kappa", num(p.kappa)}, {"theta", num(p.theta)}, {"omega", num(p.omega)},
            {"rho", num(p.rho)},     {"r", num(p.r)},         {"v0", num(p.v0)}};
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

double max_abs(const Table& t, const std::string& col) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) m = std::max(m, std::fabs(t.number(i, col)));
    return m;
}

// Heston prices against the published comparison table.
ExperimentResult heston_price_table(const RunOptions&, bool panel_a) {
    const auto P = golden::bollerslev;
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    const int N = golden::heston_order;
    auto x = km::option_expansion(models::heston(P), K, N);

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {panel_a ? "S" : "v", "ft"};
    append(t.columns, order_columns("km_", N));
    append(t.columns, order_columns("pct_", N));
    append(t.columns, {"printed_ft", "printed_km", "printed_pct"});

    for (const auto& row : panel_a ? golden::heston_prices_a : golden::heston_prices_b) {
        auto p = P;
        double S = panel_a ? row.x : K;
        if (!panel_a) p.v0 = row.x;
        double ft = fourier::heston_call_ft(p, S, K, tau);
        auto q = km::price(x, km::variance_binding(S, p.v0), tau);
        std::vector<Cell> cells{row.x, ft};
        for (double v : q.partial) cells.push_back(v);
        for (double v : q.partial) cells.push_back(percent_diff(v, ft));
        cells.insert(cells.end(), {row.ft, row.km, row.pct});
        t.add(std::move(cells));

        std::string at = (panel_a ? "S=" : "v=") + num(row.x);
        res.checks.push_back(within("fourier price " + at, ft, row.ft, 1e-3));
        res.checks.push_back(within("expansion price " + at, q.value(), row.km, 2e-3));
        res.checks.push_back(within("percent diff " + at, percent_diff(q.value(), ft), row.pct, 2e-3));
    }
    res.params = heston_echo(P);
    res.params.insert(res.params.end(), {{"K", num(K)}, {"tau", num(tau)}, {"order", std::to_string(N)}});
    return res;
}

// Heston greeks. Panel B expansion greeks hold the nuisance at sqrt(theta),
// which is how the published panel was produced.
ExperimentResult heston_greek_table(const RunOptions& o, bool panel_a) {
    const auto P = golden::bollerslev;
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    auto x = km::option_expansion(models::heston(P), K, golden::heston_order);
    const double eta_b = o.settings.number("eta0", std::sqrt(P.theta));

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {panel_a ? "S" : "v", "delta_ft", "delta_km", "delta_diff", "gamma_ft", "gamma_km", "gamma_diff",
                 "vega_ft", "vega_km", "vega_diff", "printed_delta_ft", "printed_delta_km", "printed_gamma_ft",
                 "printed_gamma_km", "printed_vega_ft", "printed_vega_km", "printed_vega_diff"};
    const auto& D = panel_a ? golden::heston_delta_a : golden::heston_delta_b;
    const auto& G = panel_a ? golden::heston_gamma_a : golden::heston_gamma_b;
    const auto& V = panel_a ? golden::heston_vega_a : golden::heston_vega_b;
    for (std::size_t i = 0; i < D.size(); ++i) {
        auto p = P;
        double S = panel_a ? D[i].x : K;
        if (!panel_a) p.v0 = D[i].x;
        auto b = km::variance_binding(S, p.v0);
        if (!panel_a) b["eta0"] = eta_b;
        auto ft = fourier::heston_greeks_ft(p, S, K, tau);
        double d_ft = 100 * ft.delta, g_ft = 100 * ft.gamma, v_ft = ft.vega;
        double d_km = 100 * km::greek(x, b, tau, "S", 1), g_km = 100 * km::greek(x, b, tau, "S", 2);
        double v_km = km::greek(x, b, tau, "v", 1);
        t.add({D[i].x, d_ft, d_km, d_ft - d_km, g_ft, g_km, g_ft - g_km, v_ft, v_km, v_ft - v_km, D[i].ft, D[i].km,
               G[i].ft, G[i].km, V[i].ft, V[i].km, V[i].diff});

        std::string at = (panel_a ? "S=" : "v=") + num(D[i].x);
        res.checks.push_back(within("fourier delta " + at, d_ft, D[i].ft, 5e-3));
        res.checks.push_back(within("fourier gamma " + at, g_ft, G[i].ft, 5e-4));
        res.checks.push_back(within("fourier vega " + at, v_ft, V[i].ft, 1e-2));
        if (panel_a) {
            res.checks.push_back(within("expansion delta " + at, d_km, D[i].km, 5e-3));
            res.checks.push_back(within("expansion gamma " + at, g_km, G[i].km, 5e-4));
            res.checks.push_back(within("expansion vega " + at, v_km, V[i].km, 1e-2));
        } else {
            // The printed panel is unstable in vega; compare sign and decade.
            double got = v_ft - v_km, want = V[i].diff;
            bool same_sign = (got > 0) == (want > 0);
            bool same_decade = std::fabs(std::log10(std::fabs(got)) - std::log10(std::fabs(want))) < 1.0;
            std::ostringstream d;
            d << "diff " << num(got) << " printed " << num(want);
            res.checks.push_back(holds("vega difference sign and magnitude " + at, same_sign && same_decade, d.str()));
        }
    }
    res.params = heston_echo(P);
    res.params.insert(res.params.end(), {{"K", num(K)}, {"tau", num(tau)}, {"order", std::to_string(golden::heston_order)}});
    if (!panel_a) res.params.push_back({"eta0_expansion", num(eta_b)});
    return res;
}

// Percent errors of each expansion order across spot prices against the
// Fourier price, for calls or puts.
ExperimentResult heston_convergence(const RunOptions& o, double default_tau, bool theta_nuisance, bool put) {
    const auto& s = o.settings;
    models::HestonParams p{s.number("kappa", 2.0), s.number("theta", 0.04), s.number("omega", 0.1),
                           s.number("rho", -0.5),  s.number("r", 0.1),      s.number("v0", 0.04)};
    const double K = s.number("K", 100), tau = s.number("tau", default_tau);
    const int N = static_cast<int>(s.integer("order", 5));
    auto call = km::option_expansion(models::heston(p), K, N);
    auto x = put ? km::put_from_call_series(call) : call;

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"S", "ft"};
    append(t.columns, order_columns("km_", N));
    append(t.columns, order_columns("pct_", N));
    for (double S : spot_grid(s, 80, 120, 1)) {
        double ft = put ? fourier::heston_put_ft(p, S, K, tau) : fourier::heston_call_ft(p, S, K, tau);
        auto b = km::variance_binding(S, p.v0);
        if (theta_nuisance) b["eta0"] = std::sqrt(p.theta);
        auto q = km::price(x, b, tau);
        std::vector<Cell> cells{S, ft};
        for (double v : q.partial) cells.push_back(v);
        for (double v : q.partial) cells.push_back(percent_diff(v, ft));
        t.add(std::move(cells));
    }

    std::vector<double> worst;
    std::ostringstream d;
    for (int n = 0; n <= N; ++n) {
        worst.push_back(max_abs(t, "pct_" + std::to_string(n)));
        d << (n ? " " : "") << "N" << n << "=" << num(worst.back());
    }
    res.checks.push_back(holds("max errors finite", std::all_of(worst.begin(), worst.end(), [](double w) {
                                   return std::isfinite(w);
                               }),
                               d.str()));
    if (!theta_nuisance) {
        // With eta0 = sqrt(v) the zeroth term vanishes and order 0 is the Black-Scholes price.
        double bs_gap = 0.0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            double S = t.number(i, "S");
            double bs = put ? closedform::bs_put(S, K, p.r, std::sqrt(p.v0), tau).price
                            : closedform::bs_call(S, K, p.r, std::sqrt(p.v0), tau).price;
            bs_gap = std::max(bs_gap, std::fabs(t.number(i, "km_0") - bs) / bs);
        }
        res.checks.push_back(holds("order 0 equals Black-Scholes", bs_gap < 1e-12, "max rel gap " + num(bs_gap)));
    }
    if (!put && !theta_nuisance && tau == 1.0 && N >= 4) {
        bool monotone = true;
        for (int n = 1; n <= 4; ++n) monotone = monotone && worst[n] <= worst[n - 1];
        res.checks.push_back(holds("max error non-increasing through order 4", monotone, d.str()));
        res.checks.push_back(holds("order 4 max error below 0.5%", worst[4] < 0.5, "N4=" + num(worst[4])));
    }
    res.params = heston_echo(p);
    res.params.insert(res.params.end(), {{"K", num(K)},
                                         {"tau", num(tau)},
                                         {"order", std::to_string(N)},
                                         {"payoff", put ? "put" : "call"},
                                         {"eta0", theta_nuisance ? "sqrt(theta)" : "sqrt(v0)"}});
    return res;
}

// Expansion against in-house simulation for the CEV tables.
ExperimentResult cev_table(const RunOptions& o, double gamma) {
    const auto P = golden::bollerslev;
    models::CevParams p{P.kappa, P.theta, P.omega, P.rho, P.r, P.v0, gamma};
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    const int N = golden::heston_order;
    auto x = km::option_expansion(models::cev(p), K, N);
    auto cfg = mc_config(o, 500, 20000);
    const bool a06 = gamma == 0.6;
    const auto& A = a06 ? golden::cev06_a : golden::cev133_a;
    const auto& B = a06 ? golden::cev06_b : golden::cev133_b;

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"panel", "S", "v", "mc", "mc_lo", "mc_hi", "mc_se"};
    append(t.columns, order_columns("km_", N));
    append(t.columns, {"pct", "printed_mc", "printed_lo", "printed_hi", "printed_km", "printed_pct"});
    auto run_row = [&](const char* panel, double S, double v, const golden::McRow& g) {
        auto pv = p;
        pv.v0 = v;
        auto sim = mc::simulate_cev_call(pv, S, K, tau, cfg);
        auto q = km::price(x, km::variance_binding(S, v), tau);
        double pct = percent_diff(q.value(), sim.estimate);
        std::vector<Cell> cells{std::string(panel), S, v, sim.estimate, sim.ci_lo, sim.ci_hi, sim.std_error};
        for (double vv : q.partial) cells.push_back(vv);
        cells.insert(cells.end(), {pct, g.mc, g.lo, g.hi, g.km, g.pct});
        t.add(std::move(cells));

        std::string at = std::string(panel) + " x=" + num(g.x);
        res.checks.push_back(within("expansion price " + at, q.value(), g.km, 1e-2));
        res.checks.push_back(holds("interval contains expansion " + at, sim.ci_lo <= q.value() && q.value() <= sim.ci_hi,
                                   "[" + num(sim.ci_lo) + ", " + num(sim.ci_hi) + "] km " + num(q.value())));
        res.checks.push_back(holds("percent diff below 1.2 " + at, std::fabs(pct) < 1.2, "pct " + num(pct)));
    };
    for (const auto& g : A) run_row("A", g.x, P.v0, g);
    for (const auto& g : B) run_row("B", K, g.x, g);

    res.params = {{"kappa", num(p.kappa)}, {"theta", num(p.theta)}, {"omega", num(p.omega)},
                  {"rho", num(p.rho)},     {"r", num(p.r)},         {"gamma", num(gamma)},
                  {"K", num(K)},           {"tau", num(tau)},       {"order", std::to_string(N)},
                  {"steps", std::to_string(cfg.steps)},             {"paths", std::to_string(cfg.paths)}};
    return res;
}

double sz_ft_delta(const models::SzParams& p, double S, double K, double tau) {
    double h = 1e-3 * S;
    return (fourier::sz_call_ft(p, S + h, K, tau) - fourier::sz_call_ft(p, S - h, K, tau)) / (2 * h);
}

double sz_ft_vega(const models::SzParams& p, double S, double K, double tau) {
    auto up = p, dn = p;
    up.sigma0 += 1e-4;
    dn.sigma0 -= 1e-4;
    return (fourier::sz_call_ft(up, S, K, tau) - fourier::sz_call_ft(dn, S, K, tau)) / 2e-4;
}

std::vector<std::pair<std::string, std::string>> sz_echo(const models::SzParams& p) {
    return {{"kappa", num(p.kappa)}, {"theta", num(p.theta)}, {"omega", num(p.omega)},
            {"rho", num(p.rho)},     {"r", num(p.r)},         {"sigma0", num(p.sigma0)}};
}

ExperimentResult sz_delta_table(const RunOptions&) {
    const auto p = golden::sz_params;
    const double K = golden::sz_K, tau = golden::sz_tau;
    const int N = golden::sz_order;
    auto x = km::option_expansion(models::schobel_zhu(p), K, N);

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"S", "delta_ft", "delta_km", "diff", "printed_ft", "printed_km", "printed_diff"};
    for (const auto& g : golden::sz_delta_a) {
        double ft = 100 * sz_ft_delta(p, g.x, K, tau);
        double kmv = 100 * km::greek(x, km::volatility_binding(g.x, p.sigma0), tau, "S", 1);
        t.add({g.x, ft, kmv, ft - kmv, g.ft, g.km, g.diff});
        std::string at = "S=" + num(g.x);
        res.checks.push_back(within("expansion delta " + at, kmv, g.km, 0.2));
        // The printed transform deltas disagree with both this pricer and
        // simulation; kept visible but not gating.
        res.checks.push_back(within("fourier delta vs printed " + at, ft, g.ft, 0.05, false));
    }
    res.params = sz_echo(p);
    res.params.insert(res.params.end(), {{"K", num(K)}, {"tau", num(tau)}, {"order", std::to_string(N)}});
    return res;
}

// Vega against spot volatility with the nuisance held at the base volatility.
ExperimentResult sz_vega_table(const RunOptions& o) {
    const auto p = golden::sz_params;
    const double K = golden::sz_K, tau = golden::sz_tau;
    const int N = golden::sz_order;
    const double eta = o.settings.number("eta0", p.sigma0);
    auto x = km::option_expansion(models::schobel_zhu(p), K, N);

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"sigma", "vega_ft", "vega_km", "diff", "printed_ft", "printed_km"};
    std::vector<double> km_vals;
    for (const auto& g : golden::sz_vega_b) {
        auto ps = p;
        ps.sigma0 = g.x;
        double ft = sz_ft_vega(ps, K, K, tau);
        auto b = km::volatility_binding(K, g.x);
        b["eta0"] = eta;
        double kmv = km::greek(x, b, tau, "sigma", 1);
        km_vals.push_back(kmv);
        t.add({g.x, ft, kmv, ft - kmv, g.ft, g.km});
    }
    std::size_t i04 = 3;
    res.checks.push_back(holds("vega negative and large at sigma=0.4", km_vals[i04] < -100, "km " + num(km_vals[i04])));
    bool growing = true;
    for (std::size_t i = i04 + 1; i < km_vals.size(); ++i)
        growing = growing && std::fabs(km_vals[i]) > std::fabs(km_vals[i - 1]);
    res.checks.push_back(holds("vega magnitude grows through sigma=1.1", growing, "km at 1.1 " + num(km_vals.back())));
    res.params = sz_echo(p);
    res.params.insert(res.params.end(),
                      {{"K", num(K)}, {"tau", num(tau)}, {"order", std::to_string(N)}, {"eta0", num(eta)}});
    return res;
}

// Expansion errors over spot prices for the Schobel-Zhu model; rho = 0 is
// the Stein-Stein case.
ExperimentResult sz_convergence(const RunOptions& o, double rho, double default_tau) {
    const auto& s = o.settings;
    auto p = golden::sz_params;
    p.rho = s.number("rho", rho);
    const double K = s.number("K", golden::sz_K), tau = s.number("tau", default_tau);
    const int N = static_cast<int>(s.integer("order", 5));
    auto x = km::option_expansion(models::schobel_zhu(p), K, N);

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"S", "ft"};
    append(t.columns, order_columns("km_", N));
    append(t.columns, order_columns("pct_", N));
    for (double S : spot_grid(s, 80, 120, 1)) {
        double ft = fourier::sz_call_ft(p, S, K, tau);
        auto q = km::price(x, km::volatility_binding(S, p.sigma0), tau);
        std::vector<Cell> cells{S, ft};
        for (double v : q.partial) cells.push_back(v);
        for (double v : q.partial) cells.push_back(percent_diff(v, ft));
        t.add(std::move(cells));
    }
    std::vector<double> worst;
    std::ostringstream d;
    for (int n = 0; n <= N; ++n) {
        worst.push_back(max_abs(t, "pct_" + std::to_string(n)));
        d << (n ? " " : "") << "N" << n << "=" << num(worst.back());
    }
    res.checks.push_back(holds("max errors finite", std::all_of(worst.begin(), worst.end(), [](double w) {
                                   return std::isfinite(w);
                               }),
                               d.str()));
    if (p.rho == 0.0 && tau == 0.25 && N >= 5) {
        res.checks.push_back(holds("order 4 max error at most 0.7%", worst[4] <= 0.7, d.str()));
        res.checks.push_back(holds("order 5 max error at most 1.2%", worst[5] <= 1.2, d.str()));
        res.checks.push_back(within("order 4 max error vs printed", worst[4], golden::ss_max_err_n4, 0.01, false));
        res.checks.push_back(within("order 5 max error vs printed", worst[5], golden::ss_max_err_n5, 0.01, false));
    }
    if (p.rho == 0.0 && tau == 1.0 && N >= 5)
        res.checks.push_back(holds("order 5 max error exceeds order 0", worst[5] > worst[0], d.str()));
    res.params = sz_echo(p);
    res.params.insert(res.params.end(), {{"K", num(K)}, {"tau", num(tau)}, {"order", std::to_string(N)}});
    return res;
}

// Futures price expansion against simulation of the commodity model.
ExperimentResult futures(const RunOptions& o, double default_tau) {
    const auto& s = o.settings;
    auto p = golden::lutz_params();
    const double tau = s.number("tau", default_tau);
    const int N = static_cast<int>(s.integer("order", 4));
    const double X0 = std::log(s.number("S", golden::lutz_S));
    auto x = km::futures_expansion(p, N);
    auto cfg = mc_config(o, 1000, 200000);
    auto sim = mc::simulate_commodity_futures(p, X0, tau, cfg);
    auto q = km::price(x, km::commodity_binding(X0, p.v0), tau);

    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"order", "km", "mc", "mc_lo", "mc_hi", "err_pct"};
    std::vector<double> err;
    for (int n = 0; n <= N; ++n) {
        err.push_back(percent_diff(q.value(n), sim.estimate));
        t.add({static_cast<long long>(n), q.value(n), sim.estimate, sim.ci_lo, sim.ci_hi, err.back()});
    }
    std::ostringstream d;
    for (int n = 0; n <= N; ++n) d << (n ? " " : "") << "N" << n << "=" << num(err[n]);

    if (tau == 0.5) {
        res.checks.push_back(holds("simulated price in [81.70, 81.92]", sim.estimate >= 81.70 && sim.estimate <= 81.92,
                                   "mc " + num(sim.estimate)));
        res.checks.push_back(within("order 0 error vs printed", err[0], golden::lutz_err_n0_T05, 0.15));
        if (N >= 1) res.checks.push_back(within("order 1 error vs printed", err[1], golden::lutz_err_n1_T05, 0.15));
        res.checks.push_back(within("simulation vs analytic value", sim.estimate, golden::lutz_analytic_T05,
                                    sim.ci_hi - sim.estimate, false));
    } else if (tau == 1.0 && N >= 4) {
        res.checks.push_back(holds("order 0 error below order 4 error", std::fabs(err[0]) < std::fabs(err[4]), d.str()));
    } else {
        res.checks.push_back(holds("all orders within 1% of simulation", std::all_of(err.begin(), err.end(), [](double e) {
                                       return std::fabs(e) < 1.0;
                                   }),
                                   d.str()));
    }
    res.params = {{"eta", num(p.eta)},       {"alpha", num(p.alpha)}, {"kappa", num(p.kappa)},
                  {"theta", num(p.theta)},   {"omega", num(p.omega)}, {"rho", num(p.rho)},
                  {"v0", num(p.v0)},         {"S", num(std::exp(X0))}, {"tau", num(tau)},
                  {"order", std::to_string(N)}, {"steps", std::to_string(cfg.steps)},
                  {"paths", std::to_string(cfg.paths)}};
    return res;
}

// One simulated variance path; Black-Scholes implied volatility of the
// Heston price along it, and the optimal nuisance at a subset of points.
ExperimentResult implied_vol_path(const RunOptions& o) {
    const auto& s = o.settings;
    models::HestonParams p{s.number("kappa", 2.0), s.number("theta", 0.04), s.number("omega", 0.1),
                           s.number("rho", -0.5),  s.number("r", 0.1),      s.number("v0", 0.04)};
    const double S = s.number("S", 100), K = s.number("K", 100), tau = s.number("tau", 1.0);
    const int steps = static_cast<int>(s.integer("steps", 500));
    const int every = static_cast<int>(s.integer("nuisance_every", 50));
    const int N = static_cast<int>(s.integer("order", 5));
    auto x = km::option_expansion(models::heston(p), K, N);

    boost::random::mt19937_64 rng(o.seed);
    boost::random::normal_distribution<double> normal;
    ExperimentResult res;
    auto& t = res.table;
    t.columns = {"step", "v", "sqrt_v", "ft", "implied_vol", "eta_opt"};
    double v = p.v0, dt = 1.0 / steps;
    double max_gap = 0.0;
    std::vector<double> iv_all, sv_all;
    for (int i = 0; i <= steps; ++i) {
        auto pv = p;
        pv.v0 = v;
        double ft = fourier::heston_call_ft(pv, S, K, tau);
        double iv = diagnostics::bs_implied_vol(ft, S, K, p.r, tau);
        double eta = std::nan("");
        if (i % every == 0) {
            eta = km::optimal_nuisance(x, km::variance_binding(S, v), tau).eta;
            max_gap = std::max(max_gap, std::fabs(eta - iv));
        }
        t.add({static_cast<long long>(i), v, std::sqrt(v), ft, iv, eta});
        iv_all.push_back(iv);
        sv_all.push_back(std::sqrt(v));
        v = std::fabs(v + p.kappa * (p.theta - v) * dt + p.omega * std::sqrt(v * dt) * normal(rng));
    }
    double mi = 0, ms = 0;
    for (std::size_t i = 0; i < iv_all.size(); ++i) mi += iv_all[i], ms += sv_all[i];
    mi /= iv_all.size();
    ms /= sv_all.size();
    double cov = 0, vi = 0, vs = 0;
    for (std::size_t i = 0; i < iv_all.size(); ++i) {
        cov += (iv_all[i] - mi) * (sv_all[i] - ms);
        vi += (iv_all[i] - mi) * (iv_all[i] - mi);
        vs += (sv_all[i] - ms) * (sv_all[i] - ms);
    }
    double corr = cov / std::sqrt(vi * vs);
    res.checks.push_back(holds("implied and spot volatility correlate", corr > 0.99, "corr " + num(corr)));
    res.checks.push_back(holds("optimal nuisance within 0.02 of implied vol", max_gap < 0.02, "max gap " + num(max_gap)));
    res.params = heston_echo(p);
    res.params.insert(res.params.end(), {{"S", num(S)}, {"K", num(K)}, {"tau", num(tau)},
                                         {"path_steps", std::to_string(steps)}, {"order", std::to_string(N)}});
    return res;
}

std::vector<Experiment> build_registry() {
    std::vector<Experiment> r;
    r.push_back({"table-hest-A", "Heston prices over spot, Fourier vs expansion",
                 [](const RunOptions& o) { return heston_price_table(o, true); }});
    r.push_back({"table-hest-B", "Heston at-the-money prices over spot variance",
                 [](const RunOptions& o) { return heston_price_table(o, false); }});
    r.push_back({"table-hest-greeks-A", "Heston delta, gamma, vega over spot",
                 [](const RunOptions& o) { return heston_greek_table(o, true); }});
    r.push_back({"table-hest-greeks-B", "Heston greeks over spot variance (expansion nuisance sqrt(theta))",
                 [](const RunOptions& o) { return heston_greek_table(o, false); }});
    r.push_back({"fig-heston-convergence", "Heston call errors by order, eta0 = sqrt(v), tau = 1",
                 [](const RunOptions& o) { return heston_convergence(o, 1.0, false, false); }});
    r.push_back({"fig-heston-convergence-theta", "Heston call errors by order, eta0 = sqrt(theta)",
                 [](const RunOptions& o) { return heston_convergence(o, 1.0, true, false); }});
    r.push_back({"fig-heston-long", "Heston call errors by order at tau = 4",
                 [](const RunOptions& o) { return heston_convergence(o, 4.0, false, false); }});
    r.push_back({"fig-heston-put", "Heston put errors by order",
                 [](const RunOptions& o) { return heston_convergence(o, 1.0, false, true); }});
    r.push_back({"fig-implied-vol", "Implied vs spot volatility along a simulated variance path", implied_vol_path});
    r.push_back({"table-cev-gamma06", "CEV gamma = 0.6, expansion vs simulation",
                 [](const RunOptions& o) { return cev_table(o, 0.6); }});
    r.push_back({"table-cev-gamma133", "CEV gamma = 1.33, expansion vs simulation",
                 [](const RunOptions& o) { return cev_table(o, 1.33); }});
    r.push_back({"table-sz-delta", "Schobel-Zhu delta over spot", sz_delta_table});
    r.push_back({"table-sz-vega", "Schobel-Zhu vega over spot volatility, nuisance held fixed", sz_vega_table});
    r.push_back({"fig-ss-T025", "Stein-Stein errors by order, tau = 0.25",
                 [](const RunOptions& o) { return sz_convergence(o, 0.0, 0.25); }});
    r.push_back({"fig-ss-T05", "Stein-Stein errors by order, tau = 0.5",
                 [](const RunOptions& o) { return sz_convergence(o, 0.0, 0.5); }});
    r.push_back({"fig-ss-T1", "Stein-Stein errors by order, tau = 1",
                 [](const RunOptions& o) { return sz_convergence(o, 0.0, 1.0); }});
    r.push_back({"fig-sz-T025", "Schobel-Zhu (rho = -0.5) errors by order, tau = 0.25",
                 [](const RunOptions& o) { return sz_convergence(o, -0.5, 0.25); }});
    r.push_back({"fig-sz-T1", "Schobel-Zhu (rho = -0.5) errors by order, tau = 1",
                 [](const RunOptions& o) { return sz_convergence(o, -0.5, 1.0); }});
    r.push_back({"fig-futures-T05", "Commodity futures by order vs simulation, tau = 0.5",
                 [](const RunOptions& o) { return futures(o, 0.5); }});
    r.push_back({"fig-futures-T1", "Commodity futures by order vs simulation, tau = 1",
                 [](const RunOptions& o) { return futures(o, 1.0); }});
    r.push_back({"fig-futures-T025", "Commodity futures by order vs simulation, tau = 0.25",
                 [](const RunOptions& o) { return futures(o, 0.25); }});
    r.push_back({"fig-futures-1M", "Commodity futures by order vs simulation, tau = 1/12",
                 [](const RunOptions& o) { return futures(o, 1.0 / 12.0); }});
    return r;
}

}  // namespace

const std::vector<Experiment>& registry() {
    static const std::vector<Experiment> r = build_registry();
    return r;
}

const Experiment& find_experiment(const std::string& id) {
    for (const auto& e : registry())
        if (e.id == id) return e;
    throw std::out_of_range("unknown experiment " + id);
}

}  // namespace kmx::tools
