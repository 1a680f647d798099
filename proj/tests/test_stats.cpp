#include <cmath>

#include "doctest.h"
#include "lagco/rng.hpp"
#include "lagco/stats.hpp"

using namespace lagco;
using namespace lagco::eval;

TEST_CASE("iqm of [1,2,3,4] is 2.5") { CHECK(iqm({1, 2, 3, 4}) == doctest::Approx(2.5)); }

TEST_CASE("iqm of a constant list is the constant; a singleton is itself") {
    CHECK(iqm({7, 7, 7, 7, 7}) == doctest::Approx(7.0));
    CHECK(iqm({3.25}) == doctest::Approx(3.25));
}

TEST_CASE("iqm is permutation invariant and bounded by min and max") {
    Rng rng(5);
    std::vector<double> xs;
    for (int i = 0; i < 37; ++i) xs.push_back(rng.uniform(-5, 5));
    double v = iqm(xs);
    std::vector<double> shuffled = xs;
    rng.shuffle(shuffled);
    CHECK(iqm(shuffled) == doctest::Approx(v));
    CHECK(v >= *std::min_element(xs.begin(), xs.end()));
    CHECK(v <= *std::max_element(xs.begin(), xs.end()));
}

TEST_CASE("iqm of 1000 uniform samples sits near one half") {
    Rng rng(42);
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(rng.uniform());
    CHECK(std::abs(iqm(xs) - 0.5) < 0.02);
}

TEST_CASE("iqm rejects empty input") { CHECK_THROWS_AS(iqm({}), std::invalid_argument); }

TEST_CASE("bootstrap interval of a constant list is degenerate and contains the iqm") {
    auto [lo, hi] = bootstrap_ci({2.5, 2.5, 2.5, 2.5}, 0.95, 500, 1);
    CHECK(lo == 2.5);
    CHECK(hi == 2.5);
}

TEST_CASE("bootstrap interval contains the point iqm on random data") {
    Rng rng(9);
    std::vector<double> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(rng.normal());
    auto [lo, hi] = bootstrap_ci(xs, 0.95, 2000, 7);
    double point = iqm(xs);
    CHECK(lo <= point);
    CHECK(point <= hi);
}

TEST_CASE("bootstrap interval narrows with sample size on synthetic normal data") {
    double last_width = 1e9;
    for (int n : {10, 100, 1000}) {
        Rng rng(static_cast<uint64_t>(n));
        std::vector<double> xs;
        for (int i = 0; i < n; ++i) xs.push_back(rng.normal());
        auto [lo, hi] = bootstrap_ci(xs, 0.95, 2000, 3);
        CHECK(hi - lo < last_width);
        last_width = hi - lo;
    }
}

TEST_CASE("spread stats of symmetric data are nearly symmetric") {
    Rng rng(11);
    std::vector<double> xs;
    for (int i = 0; i < 4000; ++i) xs.push_back(rng.normal());
    auto s = spread_stats(xs);
    CHECK(std::abs(s.lower - s.upper) < 0.1);
}

TEST_CASE("spread stats of a constant list are zero") {
    auto s = spread_stats({4, 4, 4});
    CHECK(s.lower == 0.0);
    CHECK(s.upper == 0.0);
}

TEST_CASE("spread stats on the 0..100 grid: spreads are (34, 34)") {
    std::vector<double> xs;
    for (int i = 0; i <= 100; ++i) xs.push_back(i);
    auto s = spread_stats(xs);
    CHECK(s.mean == doctest::Approx(50.0));
    CHECK(s.lower == doctest::Approx(34.0));
    CHECK(s.upper == doctest::Approx(34.0));
}

TEST_CASE("percentiles use linear interpolation") {
    std::vector<double> xs{0, 10};
    CHECK(percentile(xs, 50) == doctest::Approx(5.0));
    CHECK(percentile(xs, 25) == doctest::Approx(2.5));
}

TEST_CASE("power-law fit recovers planted exponents to three decimals") {
    for (double alpha : {0.2, 1.0, 1.8}) {
        std::vector<double> sizes, times;
        for (int n : {10, 20, 40, 80, 160}) {
            sizes.push_back(n);
            times.push_back(3.0 * std::pow(n, alpha));
        }
        auto fit = fit_power_law(sizes, times);
        CHECK(std::abs(fit.alpha - alpha) < 1e-3);
        CHECK(std::abs(fit.c - 3.0) < 1e-6);
        CHECK(fit.r2 > 0.9999);
    }
}

TEST_CASE("constant times fit a near-zero exponent") {
    auto fit = fit_power_law({10, 20, 40}, {5.0, 5.0, 5.0});
    CHECK(std::abs(fit.alpha) < 1e-12);
}

TEST_CASE("power-law fit validates inputs") {
    CHECK_THROWS_AS(fit_power_law({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1, 2, 3}, {1, -2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
}
