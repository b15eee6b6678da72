#include "kmx/fourier.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kmx::fourier {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I{0.0, 1.0};

bool tail_ok(const std::function<double(double)>& f, double U, double tol) {
    double fu = f(U);
    return std::isfinite(fu) && std::fabs(fu) * U < tol / 10.0;
}

}  // namespace

QuadResult integrate_semi_infinite(const std::function<double(double)>& f, const QuadratureSpec& spec) {
    double U = spec.upper;
    for (int i = 0; i < spec.max_doublings && !tail_ok(f, U, spec.abs_tol); ++i) U *= 2.0;

    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    int panels = std::max(1, spec.initial_panels);
    double width = U / panels;
    double total = 0.0, err = 0.0, l1 = 0.0;
    for (int i = 0; i < panels; ++i) {
        double e = 0.0, l = 0.0;
        total += GK::integrate(f, i * width, (i + 1) * width, spec.max_depth, spec.rel_tol, &e, &l);
        err += e;
        l1 += l;
    }
    // Truncation error of the tail beyond U.
    err += std::fabs(f(U)) * U;
    if (!std::isfinite(total) || err > std::max(spec.abs_tol, spec.rel_tol * l1))
        throw QuadratureError("quadrature did not reach tolerance", total, err);
    return {total, err, U};
}

cplx corrected_log(cplx z, BranchState& s) {
    double a = std::arg(z);
    if (s.started) {
        double jump = a - s.last_arg;
        if (jump > pi)
            --s.k;
        else if (jump < -pi)
            ++s.k;
    }
    s.started = true;
    s.last_arg = a;
    return {std::log(std::abs(z)), a + 2.0 * pi * s.k};
}

// ---------------------------------------------------------------- Heston

namespace {

struct HestonParts {
    cplx C;
    cplx D;
};

HestonParts heston_parts(const models::HestonParams& p, double tau, cplx u) {
    cplx s = u * u + I * u;
    if (p.omega == 0.0) {
        // Deterministic variance: only the integrated variance matters.
        double w = p.kappa == 0.0 ? tau : (1.0 - std::exp(-p.kappa * tau)) / p.kappa;
        return {-0.5 * s * p.theta * (tau - w), -0.5 * s * w};
    }
    double w2 = p.omega * p.omega;
    cplx beta = p.kappa - p.rho * p.omega * I * u;
    cplx d = std::sqrt(beta * beta + w2 * s);
    cplx g = (beta - d) / (beta + d);
    cplx e = std::exp(-d * tau);
    cplx D = (beta - d) / w2 * (1.0 - e) / (1.0 - g * e);
    cplx C = p.kappa * p.theta / w2 * ((beta - d) * tau - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
    return {C, D};
}

struct HestonIntegrands {
    const models::HestonParams& p;
    double S, K, tau;

    // psi1(u) = phi(u - i) / phi(-i), psi2(u) = phi(u)
    cplx psi(int j, double u, cplx* D = nullptr) const {
        cplx z = j == 1 ? cplx(u, -1.0) : cplx(u, 0.0);
        auto parts = heston_parts(p, tau, z);
        if (D) *D = parts.D;
        cplx v = I * z * (std::log(S) + p.r * tau) + parts.C + parts.D * p.v0;
        if (j == 1) v -= std::log(S) + p.r * tau;
        return std::exp(v);
    }
    double prob(int j, double u) const {
        if (u == 0.0) u = 1e-12;
        return std::real(std::exp(-I * u * std::log(K)) * psi(j, u) / (I * u));
    }
};

}  // namespace

cplx heston_cf(const models::HestonParams& p, double S, double tau, cplx u) {
    auto parts = heston_parts(p, tau, u);
    return std::exp(I * u * (std::log(S) + p.r * tau) + parts.C + parts.D * p.v0);
}

double heston_call_ft(const models::HestonParams& p, double S, double K, double tau, const QuadratureSpec& q) {
    HestonIntegrands h{p, S, K, tau};
    double P1 = 0.5 + integrate_semi_infinite([&](double u) { return h.prob(1, u); }, q).value / pi;
    double P2 = 0.5 + integrate_semi_infinite([&](double u) { return h.prob(2, u); }, q).value / pi;
    return S * P1 - std::exp(-p.r * tau) * K * P2;
}

double heston_put_ft(const models::HestonParams& p, double S, double K, double tau, const QuadratureSpec& q) {
    return heston_call_ft(p, S, K, tau, q) - S + std::exp(-p.r * tau) * K;
}

HestonGreeks heston_greeks_ft(const models::HestonParams& p, double S, double K, double tau,
                              const QuadratureSpec& q) {
    HestonIntegrands h{p, S, K, tau};
    auto kernel = [&](double u) { return std::exp(-I * u * std::log(K)); };
    double P1 = 0.5 + integrate_semi_infinite([&](double u) { return h.prob(1, u); }, q).value / pi;
    double gamma = integrate_semi_infinite([&](double u) { return std::real(kernel(u) * h.psi(1, u)); }, q).value /
                   (pi * S);
    auto dprob = [&](int j) {
        return integrate_semi_infinite(
                   [&](double u) {
                       if (u == 0.0) u = 1e-12;
                       cplx D;
                       cplx ps = h.psi(j, u, &D);
                       return std::real(kernel(u) * D * ps / (I * u));
                   },
                   q)
                   .value /
               pi;
    };
    double vega = S * dprob(1) - std::exp(-p.r * tau) * K * dprob(2);
    return {P1, gamma, vega};
}

// ---------------------------------------------------------------- Schobel-Zhu

namespace {

struct ZParts {
    cplx s, k, d, dt, E, ch, sh, Zs;
    cplx phase;     // unit-scaled Z with the argument of Z
    double logmag;  // log |Z|
};

// Z = cosh(d tau) + (k/d) sinh(d tau), carried relative to exp(d tau) so
// that long maturities do not overflow.
ZParts sz_z(const models::SzParams& p, double tau, cplx u) {
    ZParts z;
    z.s = u * u + I * u;
    z.k = p.kappa - I * u * p.rho * p.omega;
    z.d = std::sqrt(z.k * z.k + p.omega * p.omega * z.s);
    z.dt = z.d * tau;
    z.E = std::exp(-z.dt);
    z.ch = 0.5 * (1.0 + z.E * z.E);
    z.sh = 0.5 * (1.0 - z.E * z.E);
    z.Zs = z.ch + z.k / z.d * z.sh;
    z.phase = z.Zs * std::exp(I * z.dt.imag());
    z.logmag = z.dt.real() + std::log(std::abs(z.Zs));
    return z;
}

cplx sz_log(const ZParts& z, BranchState* branch) {
    double arg = branch ? corrected_log(z.phase, *branch).imag() : std::arg(z.phase);
    return {z.logmag, arg};
}

cplx sz_exponent(const models::SzParams& p, double S, double tau, cplx u, BranchState* branch) {
    double kt = p.kappa * p.theta;
    ZParts z = sz_z(p, tau, u);
    cplx logZ = sz_log(z, branch);
    cplx sh_Z = z.sh / z.Zs;
    cplx cm1_Z = (z.ch - z.E) / z.Zs;  // (cosh - 1) / Z
    cplx C = -z.s * sh_Z / z.d;
    cplx beta = -kt * z.s / (z.d * z.d);
    cplx B = beta * cm1_Z;
    cplx pp = -kt * beta / (2.0 * z.d);
    cplx qq = -kt * beta * z.k / (z.d * z.d);
    cplx A = 0.5 * (z.k * tau - logZ) + pp * (sh_Z - z.dt) + qq * cm1_Z;
    return I * u * (std::log(S) + p.r * tau) + A + B * p.sigma0 + 0.5 * C * p.sigma0 * p.sigma0;
}

std::vector<double> gl_grid(double U, int panels, std::vector<double>& weights) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    // Ascending reference nodes on [-1, 1].
    std::vector<std::pair<double, double>> ref;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) ref.push_back({-x[i], w[i]});
        ref.push_back({x[i], w[i]});
    }
    std::sort(ref.begin(), ref.end());
    std::vector<double> nodes;
    weights.clear();
    double h = U / panels;
    for (int j = 0; j < panels; ++j)
        for (auto [xi, wi] : ref) {
            nodes.push_back(h * (j + 0.5 * (xi + 1.0)));
            weights.push_back(0.5 * h * wi);
        }
    return nodes;
}

struct SzProbs {
    double P1, P2;
};

SzProbs sz_probs(const models::SzParams& p, double S, double K, double tau, double U, int panels, bool corrected) {
    std::vector<double> w;
    auto nodes = gl_grid(U, panels, w);
    BranchState b1, b2;
    double lnK = std::log(K);
    double fwd = std::log(S) + p.r * tau;
    double I1 = 0.0, I2 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double u = nodes[i];
        cplx e1 = sz_exponent(p, S, tau, cplx(u, -1.0), corrected ? &b1 : nullptr) - fwd;
        cplx e2 = sz_exponent(p, S, tau, cplx(u, 0.0), corrected ? &b2 : nullptr);
        cplx ker = std::exp(-I * u * lnK) / (I * u);
        I1 += w[i] * std::real(ker * std::exp(e1));
        I2 += w[i] * std::real(ker * std::exp(e2));
    }
    return {0.5 + I1 / pi, 0.5 + I2 / pi};
}

}  // namespace

cplx sz_cf(const models::SzParams& p, double S, double tau, cplx u, BranchState* branch) {
    return std::exp(sz_exponent(p, S, tau, u, branch));
}

double sz_call_ft(const models::SzParams& p, double S, double K, double tau, const SzOptions& opt) {
    // Tail test on the larger of the two integrands.
    double U = opt.upper;
    auto tail = [&](double u) {
        double fwd = std::log(S) + p.r * tau;
        double a = std::abs(std::exp(sz_exponent(p, S, tau, cplx(u, -1.0), nullptr) - fwd)) / u;
        double b = std::abs(std::exp(sz_exponent(p, S, tau, cplx(u, 0.0), nullptr))) / u;
        return std::max(a, b);
    };
    for (int i = 0; i < opt.max_doublings && tail(U) * U >= opt.tol / 10.0; ++i) U *= 2.0;

    int panels = opt.initial_panels;
    SzProbs prev = sz_probs(p, S, K, tau, U, panels, opt.branch_correction);
    for (int i = 0; i < opt.max_refinements; ++i) {
        panels *= 2;
        SzProbs next = sz_probs(p, S, K, tau, U, panels, opt.branch_correction);
        double change = std::max(std::fabs(next.P1 - prev.P1), std::fabs(next.P2 - prev.P2));
        prev = next;
        if (change < opt.tol) return S * prev.P1 - std::exp(-p.r * tau) * K * prev.P2;
    }
    double est = S * prev.P1 - std::exp(-p.r * tau) * K * prev.P2;
    throw QuadratureError("Schobel-Zhu quadrature did not converge", est, std::numeric_limits<double>::quiet_NaN());
}

double sz_put_ft(const models::SzParams& p, double S, double K, double tau, const SzOptions& opt) {
    return sz_call_ft(p, S, K, tau, opt) - S + std::exp(-p.r * tau) * K;
}

std::vector<double> sz_log_path(const models::SzParams& p, double tau, const std::vector<double>& grid, bool shift,
                                bool corrected) {
    BranchState b;
    std::vector<double> out;
    out.reserve(grid.size());
    for (double u : grid) {
        ZParts z = sz_z(p, tau, shift ? cplx(u, -1.0) : cplx(u, 0.0));
        out.push_back(sz_log(z, corrected ? &b : nullptr).imag());
    }
    return out;
}

}  // namespace kmx::fourier
