#pragma once

#include "kmx/models.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmx::mc {

enum class Scheme { milstein, euler };
enum class Boundary { reflective, absorbing };

struct McConfig {
    int steps = 500;
    long paths = 20000;
    std::uint64_t seed = 20240611;
    Scheme scheme = Scheme::milstein;
    Boundary boundary = Boundary::reflective;
    double level = 0.95;
    int threads = 0;  // 0: hardware concurrency; results do not depend on it
};

void validate(const McConfig& cfg);

struct McResult {
    double estimate;
    double std_error;
    double ci_lo;
    double ci_hi;
    long negative_variance;  // steps that produced a negative variance
    long total_steps;
    McConfig config;
};

struct Interval {
    double lo;
    double hi;
};

// estimate +- z * std / sqrt(n)
Interval confidence_interval(double mean, double std_dev, long n, double level);

class PathError : public std::runtime_error {
public:
    PathError(long path, int step);
    long path() const { return path_; }
    int step() const { return step_; }

private:
    long path_;
    int step_;
};

McResult simulate_cev_call(const models::CevParams& p, double S0, double K, double tau, const McConfig& cfg = {});
McResult simulate_sz_call(const models::SzParams& p, double S0, double K, double tau, const McConfig& cfg = {});
McResult simulate_commodity_futures(const models::CommodityParams& p, double X0, double tau,
                                    const McConfig& cfg = {1000, 200000});

}  // namespace kmx::mc
