#include <catch2/catch_amalgamated.hpp>

#include "kmx/models.hpp"

#include <cmath>
#include <random>

using namespace kmx;
using namespace kmx::models;
using Catch::Approx;

namespace {

double ev(const symx::Expression& e, const symx::Binding& b) { return symx::evaluate(e, b); }

}  // namespace

TEST_CASE("heston drift and covariance", "[models]") {
    auto m = heston({2.0, 0.04, 0.1, -0.5, 0.1, 0.04});
    symx::Binding b{{"S", 90.0}, {"v", 0.07}};
    REQUIRE(ev(m.drift[0], b) == Approx(0.1 * 90));
    REQUIRE(ev(m.drift[1], b) == Approx(2.0 * (0.04 - 0.07)));
    auto c = covariance(m);
    REQUIRE(ev(c[0][0], b) == Approx(0.07 * 90 * 90));
    REQUIRE(ev(c[0][1], b) == Approx(-0.5 * 0.1 * 0.07 * 90));
    REQUIRE(ev(c[1][0], b) == Approx(-0.5 * 0.1 * 0.07 * 90));
    REQUIRE(ev(c[1][1], b) == Approx(0.01 * 0.07));

    auto c0 = covariance(heston({2.0, 0.04, 0.1, 0.0, 0.1, 0.04}));
    REQUIRE(c0[0][1].is_constant(0.0));
    REQUIRE(c0[1][0].is_constant(0.0));
}

TEST_CASE("schobel-zhu covariance", "[models]") {
    auto c = covariance(schobel_zhu({4.0, 0.2, 0.1, -0.5, 0.0953, 0.2}));
    symx::Binding b{{"S", 100.0}, {"sigma", 0.3}};
    REQUIRE(ev(c[0][0], b) == Approx(0.09 * 1e4));
    REQUIRE(ev(c[0][1], b) == Approx(-0.5 * 0.1 * 0.3 * 100));
    REQUIRE(ev(c[1][1], b) == Approx(0.01));
}

TEST_CASE("cev at one half is heston", "[models]") {
    auto h = heston({0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172});
    auto g = cev({0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172, 0.5});
    auto ch = covariance(h), cg = covariance(g);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> uS(500, 1500), uv(1e-3, 3.0);
    for (int i = 0; i < 100; ++i) {
        symx::Binding b{{"S", uS(rng)}, {"v", uv(rng)}};
        for (int r = 0; r < 2; ++r) {
            REQUIRE(ev(g.drift[r], b) == Approx(ev(h.drift[r], b)).epsilon(1e-14));
            for (int s = 0; s < 2; ++s) REQUIRE(ev(cg[r][s], b) == Approx(ev(ch[r][s], b)).epsilon(1e-13));
        }
    }
}

TEST_CASE("commodity drift", "[models]") {
    auto m = lutz_commodity({1.0, std::log(85.0), 1.0, 0.05, 0.2, -0.5, 0.04});
    symx::Binding b{{"X", std::log(80.0)}, {"v", 0.04}};
    REQUIRE(ev(m.drift[0], b) == Approx(std::log(85.0) - std::log(80.0) - 0.02).epsilon(1e-14));
    REQUIRE(ev(m.drift[1], b) == Approx(1.0 * (0.05 - 0.04)));
    REQUIRE(m.short_rate.is_constant(0.0));
}

TEST_CASE("property: covariance is symmetric positive semi-definite", "[models][property]") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u01(0.0, 1.0), urho(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double rho = urho(rng);
        std::vector<SdeModel> ms{heston({2.0, 0.04, 0.3, rho, 0.05, 0.04}),
                                 cev({2.0, 0.04, 0.3, rho, 0.05, 0.04, 1.33}),
                                 schobel_zhu({4.0, 0.2, 0.1, rho, 0.05, 0.2}),
                                 lutz_commodity({1.0, 4.4, 1.0, 0.05, 0.2, rho, 0.04})};
        symx::Binding b{{"S", 50 + 100 * u01(rng)}, {"v", 0.01 + u01(rng)}, {"sigma", 0.01 + u01(rng)},
                        {"X", 3 + 2 * u01(rng)}};
        for (const auto& m : ms) {
            auto c = covariance(m);
            double a = ev(c[0][0], b), d = ev(c[1][1], b), o = ev(c[0][1], b);
            REQUIRE(std::isfinite(a + d + o));
            REQUIRE(o == ev(c[1][0], b));
            // 2x2 eigenvalues are non-negative iff trace and determinant are.
            REQUIRE(a + d >= -1e-12);
            REQUIRE(a * d - o * o >= -1e-12 * std::max(1.0, a * d));
        }
    }
}

TEST_CASE("correlation validation", "[models]") {
    auto L = correlation_factor({{1.0, 0.6}, {0.6, 1.0}});
    REQUIRE(L[0][1] == 0.0);
    REQUIRE(L[1][0] == Approx(0.6));
    REQUIRE(L[1][1] == Approx(0.8));
    REQUIRE_THROWS_AS(correlation_factor({{1.0, 0.9, 0.9}, {0.9, 1.0, -0.9}, {0.9, -0.9, 1.0}}), std::invalid_argument);
    auto m = heston({2.0, 0.04, 0.1, -0.5, 0.1, 0.04});
    m.correlation[0][1] = 0.2;
    REQUIRE_THROWS_AS(validate(m), std::invalid_argument);
    REQUIRE_THROWS_AS(heston({2.0, 0.04, -0.1, -0.5, 0.1, 0.04}), std::invalid_argument);
    REQUIRE_THROWS_AS(heston({2.0, 0.04, 0.1, -1.5, 0.1, 0.04}), std::invalid_argument);
}

TEST_CASE("baseline embedding pads missing state", "[models]") {
    auto h = heston({2.0, 0.04, 0.1, -0.5, 0.1, 0.04});
    auto e = embed_baseline(h, black_scholes(0.1));
    REQUIRE(e.padding == std::vector<std::string>{"v"});
    REQUIRE(e.baseline.state == h.state);
    REQUIRE(e.baseline.drift[1].is_constant(0.0));
    auto c = covariance(e.baseline);
    REQUIRE(c[1][1].is_constant(0.0));
    REQUIRE(c[0][1].is_constant(0.0));

    auto lutz = lutz_commodity({1.0, 4.4, 1.0, 0.05, 0.2, -0.5, 0.04});
    auto s = embed_baseline(lutz, schwartz1(1.0, 4.4));
    REQUIRE(s.baseline.drift[1].is_constant(0.0));
    REQUIRE(!s.baseline.drift[0].is_constant());

    auto self = embed_baseline(h, h);
    REQUIRE(self.padding.empty());
    REQUIRE_THROWS_AS(embed_baseline(black_scholes(0.1), h), std::invalid_argument);
}
