#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "toeplab/density.hpp"
#include "toeplab/regime.hpp"

using namespace toeplab;

namespace {

double growth(int n, double delta, double r) {
    return n * std::pow(r, n - 1) * (1 - r) * (1 - r) / delta;
}

}  // namespace

TEST_CASE("report arithmetic at the reference configurations") {
    auto fig1 = normalize({0.5, 0}, {0, 1});
    auto r1 = regime_report(fig1, 501, 1e-12, 0.5);
    CHECK(r1.term_coupling == doctest::Approx(1.25751501e-4).epsilon(1e-12));
    CHECK(r1.term_growth < 1e-100);
    CHECK(r1.delta_floor_ok);
    CHECK(r1.r0_ok);
    CHECK(r1.pass);
    CHECK(r1.r1 == doctest::Approx(std::sqrt(0.5) + 0.1).epsilon(1e-12));

    auto p = normalize({1, 0}, {0.25, 0});
    auto r2 = regime_report(p, 101, 1e-8, 0.8);
    CHECK(r2.term_growth == doctest::Approx(growth(101, 1e-8, 0.8)).epsilon(1e-12));
    CHECK(r2.term_growth == doctest::Approx(0.0823).epsilon(1e-2));
    CHECK(r2.term_coupling == doctest::Approx(1.030301e-2).epsilon(1e-9));
    CHECK(r2.pass);

    auto r3 = regime_report(p, 1000, 1e-3, 0.9);
    CHECK(r3.term_coupling == doctest::Approx(1e6).epsilon(1e-12));
    CHECK_FALSE(r3.pass);
}

TEST_CASE("floor and r0 range checks") {
    auto p = normalize({1, 0}, {0.25, 0});
    // delta below e^{-n/C}
    auto low = regime_report(p, 101, 1e-30, 0.5);
    CHECK_FALSE(low.delta_floor_ok);
    CHECK_FALSE(low.pass);

    CHECK_FALSE(regime_report(p, 101, 1e-8, 0.05).r0_ok);
    CHECK_FALSE(regime_report(p, 101, 1e-8, 1.0 - 1.0 / 101 + 1e-3).r0_ok);
    CHECK(regime_report(p, 101, 1e-8, 0.5).r0_ok);

    // never throws, even for nonsense input
    auto bad = regime_report(p, 101, 0.0, 0.5);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("max_admissible_r0 bisection") {
    auto p = normalize({1, 0}, {0.25, 0});
    double r0 = max_admissible_r0(p, 101, 1e-8);
    CHECK(r0 > 0.79);
    CHECK(r0 < 0.83);

    auto at = regime_report(p, 101, 1e-8, r0);
    CHECK(at.pass);
    double above = r0 + 0.01;
    if (above <= 1.0 - 1.0 / 101) {
        CHECK_FALSE(regime_report(p, 101, 1e-8, above).pass);
    }

    CHECK_THROWS_AS(max_admissible_r0(p, 101, 1e-2), Infeasible);
}

TEST_CASE("growth factor is increasing on the admissible interval") {
    // r -> r^{n-1}(1-r)^2 increases up to (n-1)/(n+1)
    for (int n : {3, 10, 101, 501}) {
        double top = double(n - 1) / double(n + 1);
        double prev = -1;
        for (int i = 0; i <= 1000; ++i) {
            double r = top * i / 1000.0;
            double v = std::pow(r, n - 1) * (1 - r) * (1 - r);
            CHECK(v >= prev);
            // strict increase wherever r^{n-1} has not underflowed
            if (i > 0 && v > 1e-290) CHECK(v > prev);
            prev = v;
        }
    }
    CHECK(growth(101, 1e-8, 0.6) < growth(101, 1e-8, 0.8));
}

TEST_CASE("error envelope is dominated by the regime terms") {
    auto p = normalize({1, 0}, {0.25, 0});
    const int n = 101;
    const double delta = 1e-8;
    const double r0 = 0.8;
    auto rep = regime_report(p, n, delta, r0);
    for (Complex z : sample_annulus(p, 200, 0.55, r0, 99)) {
        double env = error_envelope(p, n, delta, z);
        CHECK(env <= (rep.term_growth + rep.term_coupling) * (1 + 1e-12));
    }
}
