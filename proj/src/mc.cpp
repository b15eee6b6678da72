#include "kmx/mc.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

namespace kmx::mc {

namespace {

// Independent stream per path: Mersenne twister seeded from (seed, path).
class PathRng {
public:
    PathRng(std::uint64_t seed, long path) {
        auto p = static_cast<std::uint64_t>(path);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
        eng_.seed(seq);
    }
    // Ziggurat normals with a fixed algorithm across standard libraries.
    double normal() { return dist_(eng_); }

private:
    std::mt19937_64 eng_;
    boost::random::normal_distribution<double> dist_;
};

struct PathOutcome {
    double value;
    long negatives;
};

using PathFn = std::function<PathOutcome(PathRng&, long path)>;

McResult run(const McConfig& cfg, const PathFn& path_fn) {
    validate(cfg);
    std::vector<PathOutcome> out(static_cast<std::size_t>(cfg.paths));
    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1, 64);
    auto shard = [&](unsigned w) {
        for (long i = w; i < cfg.paths; i += workers) {
            PathRng rng(cfg.seed, i);
            out[i] = path_fn(rng, i);
        }
    };
    if (workers == 1) {
        shard(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr err;
        std::mutex m;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    shard(w);
                } catch (...) {
                    std::lock_guard lk(m);
                    if (!err) err = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        if (err) std::rethrow_exception(err);
    }
    // Sequential reduction keeps the result independent of the worker count.
    double sum = 0.0;
    long neg = 0;
    for (const auto& o : out) {
        sum += o.value;
        neg += o.negatives;
    }
    double mean = sum / cfg.paths;
    double ss = 0.0;
    for (const auto& o : out) ss += (o.value - mean) * (o.value - mean);
    double sd = std::sqrt(ss / (cfg.paths - 1));
    auto ci = confidence_interval(mean, sd, cfg.paths, cfg.level);
    return {mean, sd / std::sqrt(static_cast<double>(cfg.paths)), ci.lo, ci.hi, neg,
            static_cast<long>(cfg.steps) * cfg.paths, cfg};
}

void check(double x, long path, int step) {
    if (!std::isfinite(x)) throw PathError(path, step);
}

}  // namespace

void validate(const McConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("mc: steps must be at least 1");
    if (cfg.paths < 2) throw std::invalid_argument("mc: at least two paths are needed");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw std::invalid_argument("mc: confidence level must lie in (0, 1)");
}

PathError::PathError(long path, int step)
    : std::runtime_error("mc: non-finite value on path " + std::to_string(path) + " at step " + std::to_string(step)),
      path_(path),
      step_(step) {}

Interval confidence_interval(double mean, double std_dev, long n, double level) {
    if (n < 2) throw std::invalid_argument("mc: at least two samples are needed");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("mc: confidence level must lie in (0, 1)");
    double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
    double h = z * std_dev / std::sqrt(static_cast<double>(n));
    return {mean - h, mean + h};
}

McResult simulate_cev_call(const models::CevParams& p, double S0, double K, double tau, const McConfig& cfg) {
    if (!(p.gamma > 0.0)) throw std::invalid_argument("mc: gamma must be positive");
    const double dt = tau / cfg.steps, sdt = std::sqrt(dt), rc = std::sqrt(1.0 - p.rho * p.rho);
    const bool mil = cfg.scheme == Scheme::milstein, refl = cfg.boundary == Boundary::reflective;
    const double disc = std::exp(-p.r * tau);
    return run(cfg, [&](PathRng& rng, long path) {
        double S = S0, V = p.v0;
        long neg = 0;
        for (int i = 0; i < cfg.steps; ++i) {
            double z1 = rng.normal(), z2 = p.rho * z1 + rc * rng.normal();
            double a = refl ? std::fabs(V) : std::max(V, 0.0);
            double base = refl ? V : a;
            double dS = p.r * dt + std::sqrt(a) * sdt * z1;
            if (mil) dS += 0.5 * a * (z1 * z1 - 1.0) * dt;
            double Vn = base + p.kappa * (p.theta - a) * dt + p.omega * std::pow(a, p.gamma) * sdt * z2;
            if (mil && a > 0.0) Vn += 0.5 * p.omega * p.omega * p.gamma * std::pow(a, 2.0 * p.gamma - 1.0) * (z2 * z2 - 1.0) * dt;
            S *= 1.0 + dS;
            V = Vn;
            if (V < 0.0) ++neg;
            check(S, path, i);
            check(V, path, i);
        }
        return PathOutcome{disc * std::max(S - K, 0.0), neg};
    });
}

McResult simulate_sz_call(const models::SzParams& p, double S0, double K, double tau, const McConfig& cfg) {
    const double dt = tau / cfg.steps, sdt = std::sqrt(dt), rc = std::sqrt(1.0 - p.rho * p.rho);
    const bool mil = cfg.scheme == Scheme::milstein;
    const double disc = std::exp(-p.r * tau);
    return run(cfg, [&](PathRng& rng, long path) {
        double S = S0, sg = p.sigma0;
        for (int i = 0; i < cfg.steps; ++i) {
            double z1 = rng.normal(), z2 = p.rho * z1 + rc * rng.normal();
            double dS = p.r * dt + sg * sdt * z1;
            if (mil) dS += 0.5 * sg * sg * (z1 * z1 - 1.0) * dt;
            S *= 1.0 + dS;
            // The volatility may change sign; the model allows it.
            sg += p.kappa * (p.theta - sg) * dt + p.omega * sdt * z2;
            check(S, path, i);
        }
        return PathOutcome{disc * std::max(S - K, 0.0), 0};
    });
}

McResult simulate_commodity_futures(const models::CommodityParams& p, double X0, double tau, const McConfig& cfg) {
    const double dt = tau / cfg.steps, sdt = std::sqrt(dt), rc = std::sqrt(1.0 - p.rho * p.rho);
    const bool mil = cfg.scheme == Scheme::milstein, refl = cfg.boundary == Boundary::reflective;
    return run(cfg, [&](PathRng& rng, long path) {
        double X = X0, V = p.v0;
        long neg = 0;
        for (int i = 0; i < cfg.steps; ++i) {
            double z1 = rng.normal(), z2 = p.rho * z1 + rc * rng.normal();
            double a = refl ? std::fabs(V) : std::max(V, 0.0);
            X += (p.eta * (p.alpha - X) - 0.5 * a) * dt + std::sqrt(a) * sdt * z1;
            double Vn = a + p.kappa * (p.theta - a) * dt + p.omega * std::sqrt(a * dt) * z2;
            if (mil) Vn += 0.25 * p.omega * p.omega * (z2 * z2 - 1.0) * dt;
            V = Vn;
            if (V < 0.0) ++neg;
            check(X, path, i);
        }
        return PathOutcome{std::exp(X), neg};
    });
}

}  // namespace kmx::mc
