#pragma once

#include "kmx/models.hpp"

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace kmx::fourier {

using cplx = std::complex<double>;

struct QuadratureSpec {
    double abs_tol = 1e-11;
    double rel_tol = 1e-12;
    double upper = 200.0;   // initial truncation point U
    int max_doublings = 3;  // U doubles while |f(U)| U >= abs_tol / 10
    int initial_panels = 8;
    int max_depth = 20;
};

struct QuadResult {
    double value;
    double error;
    double upper;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    double estimate() const { return estimate_; }
    double error() const { return error_; }

private:
    double estimate_;
    double error_;
};

// Adaptive Gauss-Kronrod over [0, U].
QuadResult integrate_semi_infinite(const std::function<double(double)>& f, const QuadratureSpec& spec = {});

struct BranchState {
    bool started = false;
    double last_arg = 0.0;
    int k = 0;  // completed rotations
};

// log|z| + i (Arg z + 2 k pi), k tracking crossings of the negative real axis
// between consecutive calls.
cplx corrected_log(cplx z, BranchState& state);

// E[exp(i u ln S_T)] in the rotation-free formulation.
cplx heston_cf(const models::HestonParams& p, double S, double tau, cplx u);

double heston_call_ft(const models::HestonParams& p, double S, double K, double tau, const QuadratureSpec& q = {});
double heston_put_ft(const models::HestonParams& p, double S, double K, double tau, const QuadratureSpec& q = {});

struct HestonGreeks {
    double delta;
    double gamma;
    double vega;  // with respect to the spot variance v
};

HestonGreeks heston_greeks_ft(const models::HestonParams& p, double S, double K, double tau,
                              const QuadratureSpec& q = {});

struct SzOptions {
    bool branch_correction = true;
    double tol = 1e-8;
    double upper = 200.0;
    int max_doublings = 3;
    int initial_panels = 64;
    int max_refinements = 10;
};

// E[exp(i u ln S_T)] for the Schobel-Zhu model; the logarithm of
// cosh(d tau) + (k/d) sinh(d tau) goes through corrected_log when a branch
// state is supplied and through the principal branch otherwise.
cplx sz_cf(const models::SzParams& p, double S, double tau, cplx u, BranchState* branch);

double sz_call_ft(const models::SzParams& p, double S, double K, double tau, const SzOptions& opt = {});
double sz_put_ft(const models::SzParams& p, double S, double K, double tau, const SzOptions& opt = {});

// Imaginary parts of the (corrected or principal) logarithm along the
// monotone grid, for the P1 (shift = true) or P2 characteristic function.
std::vector<double> sz_log_path(const models::SzParams& p, double tau, const std::vector<double>& grid, bool shift,
                                bool corrected);

}  // namespace kmx::fourier
