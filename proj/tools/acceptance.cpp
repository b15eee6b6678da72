// Acceptance runner: one PASS/FAIL line per criterion. Exit status 0 only
// when every criterion passes.

#include "golden.hpp"
#include "kmx/closedform.hpp"
#include "kmx/diagnostics.hpp"
#include "kmx/fourier.hpp"
#include "kmx/kmcore.hpp"
#include "kmx/mc.hpp"
#include "kmx/symx.hpp"
#include "random_expr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace kmx;

namespace {

namespace tol {
constexpr double heston_ft_price = 1e-3;
constexpr double heston_km_price = 2e-3;
constexpr double heston_pct = 2e-3;
constexpr double delta_pp = 5e-3;
constexpr double gamma_pp = 5e-4;
constexpr double vega_abs = 1e-2;
constexpr double delta0_rel = 1e-12;
constexpr double convergence_n4_max = 0.5;
constexpr double put_parity = 1e-10;
constexpr double cev_km = 1e-2;
constexpr double cev_pct = 1.2;
constexpr double ss_n4_max = 0.7;
constexpr double ss_n5_max = 1.2;
constexpr double sz_vega_floor = 100.0;
constexpr double futures_mc_lo = 81.70;
constexpr double futures_mc_hi = 81.92;
constexpr double futures_err_pp = 0.15;
constexpr double branch_jump = std::numbers::pi;
constexpr double branch_price_change = 1e-2;
constexpr double symbolic_fd_rel = 1e-5;
constexpr double simplify_abs = 1e-12;
constexpr double scale_density = 1e-8;
}  // namespace tol

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double x) {
    std::ostringstream o;
    o.precision(6);
    o << x;
    return o.str();
}

// Tracks the largest deviation and the first failure for a detail string.
struct Tally {
    bool ok = true;
    double worst = 0.0;
    std::string first;

    void near(const std::string& what, double got, double want, double t) {
        double d = std::fabs(got - want);
        worst = std::max(worst, d);
        if (d > t && ok) first = what + " got " + fmt(got) + " want " + fmt(want);
        ok = ok && d <= t;
    }
    void require(const std::string& what, bool cond) {
        if (!cond && ok) first = what;
        ok = ok && cond;
    }
    Outcome outcome(const std::string& summary) const { return {ok, ok ? summary : "first failure: " + first}; }
};

double pct(double a, double ref) { return diagnostics::percent_diff(a, ref); }

Outcome heston_golden_table() {
    const auto P = golden::bollerslev;
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    auto x = km::option_expansion(models::heston(P), K, golden::heston_order);
    Tally t;
    for (bool a : {true, false})
        for (const auto& row : a ? golden::heston_prices_a : golden::heston_prices_b) {
            auto p = P;
            double S = a ? row.x : K;
            if (!a) p.v0 = row.x;
            double ft = fourier::heston_call_ft(p, S, K, tau);
            double kmv = km::price(x, km::variance_binding(S, p.v0), tau).value();
            std::string at = std::string(a ? "S=" : "v=") + fmt(row.x);
            t.near("ft " + at, ft, row.ft, tol::heston_ft_price);
            t.near("km " + at, kmv, row.km, tol::heston_km_price);
            t.near("pct " + at, pct(kmv, ft), row.pct, tol::heston_pct);
        }
    return t.outcome("22 rows, largest deviation " + fmt(t.worst));
}

Outcome heston_greeks() {
    const auto P = golden::bollerslev;
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    auto x = km::option_expansion(models::heston(P), K, golden::heston_order);
    Tally t;
    for (std::size_t i = 0; i < golden::heston_delta_a.size(); ++i) {
        double S = golden::heston_delta_a[i].x;
        auto b = km::variance_binding(S, P.v0);
        auto ft = fourier::heston_greeks_ft(P, S, K, tau);
        std::string at = "S=" + fmt(S);
        t.near("ft delta " + at, 100 * ft.delta, golden::heston_delta_a[i].ft, tol::delta_pp);
        t.near("km delta " + at, 100 * km::greek(x, b, tau, "S", 1), golden::heston_delta_a[i].km, tol::delta_pp);
        t.near("ft gamma " + at, 100 * ft.gamma, golden::heston_gamma_a[i].ft, tol::gamma_pp);
        t.near("km gamma " + at, 100 * km::greek(x, b, tau, "S", 2), golden::heston_gamma_a[i].km, tol::gamma_pp);
        t.near("ft vega " + at, ft.vega, golden::heston_vega_a[i].ft, tol::vega_abs);
        t.near("km vega " + at, km::greek(x, b, tau, "v", 1), golden::heston_vega_a[i].km, tol::vega_abs);
    }
    // Panel B: vega differences by sign and decade, nuisance at sqrt(theta).
    for (std::size_t i = 0; i < golden::heston_vega_b.size(); ++i) {
        const auto& row = golden::heston_vega_b[i];
        auto p = P;
        p.v0 = row.x;
        auto b = km::variance_binding(K, row.x);
        b["eta0"] = std::sqrt(P.theta);
        auto ft = fourier::heston_greeks_ft(p, K, K, tau);
        std::string at = "v=" + fmt(row.x);
        t.near("ft delta " + at, 100 * ft.delta, golden::heston_delta_b[i].ft, tol::delta_pp);
        t.near("ft gamma " + at, 100 * ft.gamma, golden::heston_gamma_b[i].ft, tol::gamma_pp);
        t.near("ft vega " + at, ft.vega, row.ft, tol::vega_abs);
        double diff = ft.vega - km::greek(x, b, tau, "v", 1);
        t.require("vega diff sign " + at, (diff > 0) == (row.diff > 0));
        t.require("vega diff decade " + at,
                  std::fabs(std::log10(std::fabs(diff)) - std::log10(std::fabs(row.diff))) < 1.0);
    }
    return t.outcome("largest deviation " + fmt(t.worst) + "; panel B vega differences agree in sign and decade");
}

Outcome delta0_vanishing() {
    double worst = 0.0;
    auto check = [&](const km::KmExpansion& x, const symx::Binding& b, double vol, double S, double K, double r,
                     double tau) {
        auto q = km::price(x, b, tau);
        double bs = closedform::bs_call(S, K, r, vol, tau).price;
        worst = std::max({worst, std::fabs(q.value(0) - q.baseline) / std::fabs(q.baseline),
                          std::fabs(q.baseline - bs) / bs});
    };
    models::HestonParams h{2.0, 0.04, 0.1, -0.5, 0.1, 0.04};
    auto xh = km::option_expansion(models::heston(h), 100, 1);
    auto xc = km::option_expansion(models::cev({2.0, 0.04, 0.1, -0.5, 0.1, 0.04, 1.33}), 100, 1);
    auto xs = km::option_expansion(models::schobel_zhu(golden::sz_params), 100, 1);
    for (double S : {85.0, 100.0, 115.0})
        for (double tau : {0.25, 1.0})
            for (double v : {0.02, 0.04, 0.09}) {
                check(xh, km::variance_binding(S, v), std::sqrt(v), S, 100, 0.1, tau);
                check(xc, km::variance_binding(S, v), std::sqrt(v), S, 100, 0.1, tau);
                double sig = std::sqrt(v);
                check(xs, km::volatility_binding(S, sig), sig, S, 100, golden::sz_params.r, tau);
            }
    return {worst <= tol::delta0_rel, "54 bindings, largest relative gap " + fmt(worst)};
}

Outcome heston_convergence_shape() {
    models::HestonParams p{2.0, 0.04, 0.1, -0.5, 0.1, 0.04};
    auto x = km::option_expansion(models::heston(p), 100, 4);
    std::vector<double> worst(5, 0.0);
    for (double S = 80; S <= 120; S += 1) {
        double ft = fourier::heston_call_ft(p, S, 100, 1.0);
        auto q = km::price(x, km::variance_binding(S, p.v0), 1.0);
        for (int n = 0; n <= 4; ++n) worst[n] = std::max(worst[n], std::fabs(pct(q.value(n), ft)));
    }
    bool monotone = true;
    for (int n = 1; n <= 4; ++n) monotone = monotone && worst[n] <= worst[n - 1];
    std::string d = "max |%Diff| N0..N4:";
    for (double w : worst) d += " " + fmt(w);
    return {monotone && worst[4] < tol::convergence_n4_max, d};
}

Outcome put_parity() {
    models::HestonParams p{2.0, 0.04, 0.1, -0.5, 0.1, 0.04};
    auto call = km::option_expansion(models::heston(p), 100, 5);
    auto put = km::put_from_call_series(call);
    double worst = 0.0;
    for (double S : {80.0, 95.0, 100.0, 110.0, 120.0})
        for (double tau : {0.25, 1.0})
            for (double v : {0.04, 0.09}) {
                auto b = km::variance_binding(S, v);
                auto qc = km::price(call, b, tau), qp = km::price(put, b, tau);
                for (int n = 0; n <= 5; ++n)
                    worst = std::max(worst, std::fabs(diagnostics::parity_check(qc.value(n), qp.value(n), S, 100, p.r, tau)));
            }
    return {worst <= tol::put_parity, "120 order/point pairs, largest residual " + fmt(worst)};
}

Outcome cev_cross_validation(std::uint64_t seed) {
    const auto P = golden::bollerslev;
    const double K = golden::bollerslev_K, tau = golden::bollerslev_tau;
    mc::McConfig cfg{500, 20000};
    cfg.seed = seed;
    Tally t;
    double worst_pct = 0.0;
    for (double gamma : {0.6, 1.33}) {
        models::CevParams p{P.kappa, P.theta, P.omega, P.rho, P.r, P.v0, gamma};
        auto x = km::option_expansion(models::cev(p), K, golden::heston_order);
        const auto& A = gamma == 0.6 ? golden::cev06_a : golden::cev133_a;
        const auto& B = gamma == 0.6 ? golden::cev06_b : golden::cev133_b;
        for (bool a : {true, false})
            for (const auto& row : a ? A : B) {
                auto pv = p;
                double S = a ? row.x : K;
                if (!a) pv.v0 = row.x;
                double kmv = km::price(x, km::variance_binding(S, pv.v0), tau).value();
                auto sim = mc::simulate_cev_call(pv, S, K, tau, cfg);
                std::string at = "gamma=" + fmt(gamma) + (a ? " S=" : " v=") + fmt(row.x);
                t.near("km " + at, kmv, row.km, tol::cev_km);
                t.require("CI misses km " + at, sim.ci_lo <= kmv && kmv <= sim.ci_hi);
                double d = std::fabs(pct(kmv, sim.estimate));
                worst_pct = std::max(worst_pct, d);
                t.require("|%Diff| " + at + " = " + fmt(d), d < tol::cev_pct);
            }
    }
    return t.outcome("44 rows; largest km deviation " + fmt(t.worst) + ", largest |%Diff| vs MC " + fmt(worst_pct));
}

Outcome gamma_reduction(std::uint64_t seed) {
    const auto P = golden::bollerslev;
    models::CevParams p{P.kappa, P.theta, P.omega, P.rho, P.r, P.v0, 0.5};
    mc::McConfig cfg{500, 20000};
    cfg.seed = seed;
    auto sim = mc::simulate_cev_call(p, 1000, 1000, golden::bollerslev_tau, cfg);
    double ft = fourier::heston_call_ft(P, 1000, 1000, golden::bollerslev_tau);
    return {sim.ci_lo <= ft && ft <= sim.ci_hi,
            "CI [" + fmt(sim.ci_lo) + ", " + fmt(sim.ci_hi) + "] vs Fourier " + fmt(ft)};
}

std::vector<double> sz_max_errors(const models::SzParams& p, double tau, int N) {
    auto x = km::option_expansion(models::schobel_zhu(p), 100, N);
    std::vector<double> worst(N + 1, 0.0);
    for (double S = 80; S <= 120; S += 1) {
        double ft = fourier::sz_call_ft(p, S, 100, tau);
        auto q = km::price(x, km::volatility_binding(S, p.sigma0), tau);
        for (int n = 0; n <= N; ++n) worst[n] = std::max(worst[n], std::fabs(pct(q.value(n), ft)));
    }
    return worst;
}

Outcome sz_convergence() {
    auto p = golden::sz_params;
    p.rho = 0.0;
    auto short_t = sz_max_errors(p, 0.25, 5);
    auto long_t = sz_max_errors(p, 1.0, 5);
    bool ok = short_t[4] <= tol::ss_n4_max && short_t[5] <= tol::ss_n5_max && long_t[5] > long_t[0];
    return {ok, "tau=0.25 N4 " + fmt(short_t[4]) + " N5 " + fmt(short_t[5]) + "; tau=1 N0 " + fmt(long_t[0]) +
                    " N5 " + fmt(long_t[5])};
}

Outcome sz_vega_instability() {
    const auto p = golden::sz_params;
    auto x = km::option_expansion(models::schobel_zhu(p), golden::sz_K, golden::sz_order);
    std::vector<double> vega;
    for (const auto& row : golden::sz_vega_b) {
        if (row.x < 0.35) continue;
        auto b = km::volatility_binding(golden::sz_K, row.x);
        b["eta0"] = p.sigma0;
        vega.push_back(km::greek(x, b, golden::sz_tau, "sigma", 1));
    }
    bool ok = vega[0] < 0 && std::fabs(vega[0]) > tol::sz_vega_floor;
    for (std::size_t i = 1; i < vega.size(); ++i) ok = ok && std::fabs(vega[i]) > std::fabs(vega[i - 1]);
    return {ok, "vega at 0.4 " + fmt(vega[0]) + ", at 1.1 " + fmt(vega.back())};
}

Outcome commodity_futures(std::uint64_t seed, long paths) {
    auto p = golden::lutz_params();
    const double X0 = std::log(golden::lutz_S);
    auto x = km::futures_expansion(p, 4);
    mc::McConfig cfg{1000, paths};
    cfg.seed = seed;
    auto sim05 = mc::simulate_commodity_futures(p, X0, 0.5, cfg);
    auto q05 = km::price(x, km::commodity_binding(X0, p.v0), 0.5);
    double e0 = pct(q05.value(0), sim05.estimate), e1 = pct(q05.value(1), sim05.estimate);
    auto sim1 = mc::simulate_commodity_futures(p, X0, 1.0, cfg);
    auto q1 = km::price(x, km::commodity_binding(X0, p.v0), 1.0);
    double f0 = std::fabs(pct(q1.value(0), sim1.estimate)), f4 = std::fabs(pct(q1.value(4), sim1.estimate));

    bool mc_ok = sim05.estimate >= tol::futures_mc_lo && sim05.estimate <= tol::futures_mc_hi;
    bool e0_ok = std::fabs(e0 - golden::lutz_err_n0_T05) <= tol::futures_err_pp;
    bool e1_ok = std::fabs(e1 - golden::lutz_err_n1_T05) <= tol::futures_err_pp;
    bool order_ok = f0 < f4;
    std::string d = "MC(0.5) " + fmt(sim05.estimate) + (mc_ok ? " ok" : " out of range") + "; err N0 " + fmt(e0) +
                    (e0_ok ? " ok" : " off") + ", N1 " + fmt(e1) + (e1_ok ? " ok" : " off") + "; tau=1 |err| N0 " +
                    fmt(f0) + " vs N4 " + fmt(f4) + (order_ok ? " ok" : " (N0 not below N4)");
    return {mc_ok && e0_ok && e1_ok && order_ok, d};
}

Outcome branch_correction() {
    const auto p = golden::sz_params;
    std::vector<double> grid;
    for (int i = 1; i <= 20000; ++i) grid.push_back(0.01 * i);
    double worst = 0.0;
    for (bool shift : {false, true}) {
        auto path = fourier::sz_log_path(p, golden::sz_tau, grid, shift, true);
        for (std::size_t i = 1; i < path.size(); ++i) worst = std::max(worst, std::fabs(path[i] - path[i - 1]));
    }
    // Stress set documented in the README.
    const models::SzParams stress{4.0, 0.2, 1.0, -0.9, 0.0, 0.2};
    auto price = [&](bool corrected) {
        fourier::SzOptions o;
        o.branch_correction = corrected;
        try {
            return fourier::sz_call_ft(stress, 100, 100, 2.0, o);
        } catch (const fourier::QuadratureError& e) {
            return e.estimate();
        }
    };
    double on = price(true), off = price(false);
    bool ok = worst < tol::branch_jump && std::fabs(on - off) > tol::branch_price_change;
    return {ok, "largest step " + fmt(worst) + "; stress price corrected " + fmt(on) + " uncorrected " + fmt(off)};
}

Outcome property_suites(std::uint64_t seed) {
    Tally t;
    {
        testing::RandomExpr gen(seed);
        int checked = 0;
        double worst = 0.0;
        while (checked < 1000) {
            auto e = gen(4);
            auto b = gen.binding();
            const char* v = checked % 2 ? "x" : "y";
            double f, sym, num;
            try {
                f = symx::evaluate(e, b);
                sym = symx::evaluate(symx::differentiate(e, v), b);
                auto bb = b;
                double h = 1e-5 * (1 + std::fabs(b[v]));
                bb[v] = b[v] + h;
                double up = symx::evaluate(e, bb);
                bb[v] = b[v] - h;
                num = (up - symx::evaluate(e, bb)) / (2 * h);
            } catch (const symx::DomainError&) {
                continue;
            }
            if (std::fabs(f) > 1e6 || std::fabs(sym) > 1e6) continue;
            double scale = std::max(std::fabs(sym), 1e-6 * (1 + std::fabs(f)));
            worst = std::max(worst, std::fabs(sym - num) / scale);
            ++checked;
        }
        t.require("symbolic vs FD " + fmt(worst), worst < tol::symbolic_fd_rel);
    }
    {
        testing::RandomExpr gen(seed + 1, true);
        int checked = 0;
        double worst = 0.0;
        while (checked < 1000) {
            auto e = gen(4);
            auto b = gen.binding();
            double raw;
            try {
                raw = symx::evaluate(e, b);
            } catch (const symx::DomainError&) {
                continue;
            }
            double s = symx::evaluate(symx::simplify(e), b);
            worst = std::max(worst, std::fabs(s - raw) / std::max(1.0, std::fabs(raw)));
            ++checked;
        }
        t.require("simplify preserves value " + fmt(worst), worst < tol::simplify_abs);
    }
    {
        mc::McConfig a{100, 2000};
        a.seed = seed;
        a.threads = 1;
        auto b = a;
        b.threads = 4;
        const auto& P = golden::bollerslev;
        models::CevParams p{P.kappa, P.theta, P.omega, P.rho, P.r, P.v0, 1.33};
        auto r1 = mc::simulate_cev_call(p, 1000, 1000, golden::bollerslev_tau, a);
        auto r2 = mc::simulate_cev_call(p, 1000, 1000, golden::bollerslev_tau, a);
        auto r3 = mc::simulate_cev_call(p, 1000, 1000, golden::bollerslev_tau, b);
        auto same = [](const mc::McResult& x, const mc::McResult& y) {
            return std::memcmp(&x.estimate, &y.estimate, sizeof(double)) == 0 &&
                   std::memcmp(&x.ci_lo, &y.ci_lo, sizeof(double)) == 0 &&
                   std::memcmp(&x.ci_hi, &y.ci_hi, sizeof(double)) == 0;
        };
        t.require("MC determinism", same(r1, r2) && same(r1, r3));
    }
    {
        double worst = 0.0;
        for (double gamma : {0.5, 0.6, 1.0, 1.33, 1.8})
            for (int i = 0; i <= 60; ++i) {
                double v = 0.01 * std::pow(1000.0, i / 60.0);
                double closed = diagnostics::cev_log_scale_density(2.0, 0.04, 0.1, gamma, v);
                double quad = diagnostics::cev_log_scale_quadrature(2.0, 0.04, 0.1, gamma, v);
                worst = std::max(worst, std::fabs(closed - quad) / std::max(1.0, std::fabs(closed)));
            }
        t.require("scale density " + fmt(worst), worst < tol::scale_density);
    }
    return t.outcome("derivatives, simplify, MC determinism and scale density all within tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 20240611;
    long futures_paths = 200000;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--reduced") futures_paths = 50000;
        else if (a == "--seed" && i + 1 < argc) seed = std::stoull(argv[++i]);
        else {
            std::cerr << "usage: kmx_acceptance [--reduced] [--seed N]\n";
            return 2;
        }
    }

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Heston golden prices", heston_golden_table},
        {2, "Heston greeks", heston_greeks},
        {3, "zeroth term vanishes at eta0 = sqrt(v)", delta0_vanishing},
        {4, "Heston convergence shape", heston_convergence_shape},
        {5, "put-call parity of expansions", put_parity},
        {6, "CEV cross-validation", [&] { return cev_cross_validation(seed); }},
        {7, "gamma = 1/2 reduces to Heston", [&] { return gamma_reduction(seed); }},
        {8, "Stein-Stein convergence and divergence", sz_convergence},
        {9, "Schobel-Zhu vega instability", sz_vega_instability},
        {10, "commodity futures", [&] { return commodity_futures(seed, futures_paths); }},
        {11, "branch-cut correction", branch_correction},
        {12, "property suites", [&] { return property_suites(seed); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << "  (" << o.detail
                  << "; " << fmt(secs) << " s)" << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
