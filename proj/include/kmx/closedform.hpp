#pragma once

#include "kmx/symx.hpp"

#include <string>

namespace kmx::closedform {

double normal_cdf(double x);
double normal_pdf(double x);

struct BsQuote {
    double price;
    double d1;
    double d2;
    double delta;
    double gamma;
};

BsQuote bs_call(double S, double K, double r, double vol, double tau);
BsQuote bs_put(double S, double K, double r, double vol, double tau);
// dC/dvol; identical for calls and puts.
double bs_vega(double S, double K, double r, double vol, double tau);

// Variable names used by the symbolic pricers. t is calendar time and T the
// maturity, so tau = T - t.
struct BsNames {
    std::string S = "S";
    std::string t = "t";
    std::string T = "T";
    std::string vol = "eta0";
};

symx::Expression bs_call_symbolic(const symx::Expression& K, const symx::Expression& r, const BsNames& names = {});
symx::Expression bs_put_symbolic(const symx::Expression& K, const symx::Expression& r, const BsNames& names = {});

struct SchwartzQuote {
    double F;
    double mean;      // of ln S_T
    double variance;  // of ln S_T
};

SchwartzQuote schwartz_futures(double x, double alpha, double kappa, double sigma0, double T);

struct SchwartzNames {
    std::string X = "X";
    std::string t = "t";
    std::string T = "T";
    std::string vol = "sigma0";
};

symx::Expression schwartz_futures_symbolic(const symx::Expression& alpha, const symx::Expression& kappa,
                                           const SchwartzNames& names = {});

}  // namespace kmx::closedform
