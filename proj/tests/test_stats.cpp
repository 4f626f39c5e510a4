#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "exitlab/errors.hpp"
#include "exitlab/reference.hpp"
#include "exitlab/rng.hpp"
#include "exitlab/stats.hpp"

using namespace exitlab;

TEST_CASE("ks: identical samples have statistic zero") {
    const std::vector<double> s{0.1, 0.7, -0.3, 2.0};
    CHECK(ks_statistic(s, s) == 0.0);
    const TestReport r = ks_two_sample(s, s, 0.01);
    CHECK(r.statistic == 0.0);
    CHECK(*r.p_value > 0.99);
}

TEST_CASE("ks: point mass at zero vs fair signs approaches 1/2") {
    const std::vector<double> zeros(10000, 0.0);
    const auto pm = exact_two_point(10000, 5);
    std::vector<double> signs(pm.count());
    for (std::size_t i = 0; i < pm.count(); ++i) signs[i] = pm.values.at(i, 0);
    const double d = ks_statistic(zeros, signs);
    CHECK(d >= 0.48);
    CHECK(d <= 0.52);
}

TEST_CASE("ks is symmetric in its arguments") {
    const auto a = gaussian_increments({1, 1, 0}, 500, 1.0);
    const auto b = gaussian_increments({1, 2, 0}, 700, 1.3);
    const TestReport r1 = ks_two_sample(a, b, 0.01);
    const TestReport r2 = ks_two_sample(b, a, 0.01);
    CHECK(r1.statistic == r2.statistic);
    CHECK(*r1.p_value == *r2.p_value);
}

TEST_CASE("ks rejects empty samples") {
    const std::vector<double> s{1.0};
    CHECK_THROWS_AS(ks_two_sample({}, s, 0.01), DomainError);
}

TEST_CASE("ks level: independent fair-sign samples pass at least 98 of 100 seeds") {
    int passes = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto a = exact_two_point(10000, 1000 + rep);
        const auto b = exact_two_point(10000, 5000 + rep);
        std::vector<double> sa(a.count()), sb(b.count());
        for (std::size_t i = 0; i < a.count(); ++i) sa[i] = a.values.at(i, 0);
        for (std::size_t i = 0; i < b.count(); ++i) sb[i] = b.values.at(i, 0);
        if (*ks_two_sample(sa, sb, 0.01).p_value > 0.01) ++passes;
    }
    CHECK(passes >= 98);
}

TEST_CASE("chi2: exactly equal bin counts give statistic zero") {
    const std::size_t bins = 8, per_bin = 25;
    Matrix values(bins * per_bin, 2);
    std::size_t row = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double angle = -std::acos(-1.0) + (b + 0.5) * 2.0 * std::acos(-1.0) / bins;
        for (std::size_t k = 0; k < per_bin; ++k, ++row) {
            values.at(row, 0) = std::cos(angle);
            values.at(row, 1) = std::sin(angle);
        }
    }
    const TestReport r = chi2_sphere_uniformity(values, bins, 0.01);
    CHECK(r.statistic == 0.0);
    CHECK(r.pass);
}

TEST_CASE("chi2: all mass in one bin gives N(k-1) exactly") {
    const std::size_t n = 40, bins = 8;
    Matrix values(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        values.at(i, 0) = 1.0;
        values.at(i, 1) = 0.0;
    }
    const TestReport r = chi2_sphere_uniformity(values, bins, 0.01);
    CHECK(r.statistic == doctest::Approx(static_cast<double>(n * (bins - 1))).epsilon(1e-12));
    CHECK(!r.pass);
}

TEST_CASE("chi2 preconditions") {
    Matrix values(40, 2);
    for (std::size_t i = 0; i < 40; ++i) values.at(i, 0) = 2.0;  // not unit norm
    CHECK_THROWS_AS(chi2_sphere_uniformity(values, 8, 0.01), DomainError);
    Matrix ok(40, 2);
    for (std::size_t i = 0; i < 40; ++i) ok.at(i, 0) = 1.0;
    CHECK_THROWS_AS(chi2_sphere_uniformity(ok, 1, 0.01), DomainError);
    CHECK_THROWS_AS(chi2_sphere_uniformity(ok, 16, 0.01), DomainError);  // < 5 per bin
}

TEST_CASE("chi2 level on the uniform sphere: at least 98 of 100 seeds pass") {
    int passes = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto s = sample_uniform_sphere(2, 2000, 777000 + rep);
        if (chi2_sphere_uniformity(s.values, 8, 0.01).pass) ++passes;
    }
    CHECK(passes >= 98);
}

TEST_CASE("tightness diagnostic: degenerate input and direction flags") {
    const std::vector<double> zeros(100, 0.0);
    const TestReport r = tightness_diagnostic(zeros, 0.5, 0.95, true);
    CHECK(r.statistic == 0.0);
    CHECK(!r.pass);
    const TestReport c = tightness_diagnostic(zeros, 0.5, 0.01, false);
    CHECK(c.pass);
    CHECK_THROWS_AS(tightness_diagnostic(zeros, 1.5, 0.95, true), DomainError);
}

TEST_CASE("mean_with_ci: constants, the 1.96/sqrt(n) half-width, degenerate input") {
    const std::vector<double> constant(50, 3.25);
    const auto [m1, hw1] = mean_with_ci(constant, 0.95);
    CHECK(m1 == 3.25);
    CHECK(hw1 == 0.0);

    std::vector<double> alternating(10000);
    for (std::size_t i = 0; i < alternating.size(); ++i) alternating[i] = i % 2 ? 1.0 : -1.0;
    const auto [m2, hw2] = mean_with_ci(alternating, 0.95);
    CHECK(m2 == 0.0);
    CHECK(std::abs(hw2 - 0.0196) <= 1e-4);

    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(mean_with_ci(one, 0.95), DomainError);
    CHECK_THROWS_AS(mean_with_ci({}, 0.95), DomainError);
}

TEST_CASE("levy distance: matched atoms, offset atoms, mass imbalance") {
    std::vector<double> matched;
    for (int i = 0; i < 500; ++i) {
        matched.push_back(-1.0);
        matched.push_back(1.0);
    }
    CHECK(levy_distance_to_two_point(matched) == 0.0);

    std::vector<double> offset;
    for (int i = 0; i < 500; ++i) {
        offset.push_back(-0.995);
        offset.push_back(1.005);
    }
    const double d = levy_distance_to_two_point(offset);
    CHECK(d == doctest::Approx(0.005).epsilon(1e-6));

    std::vector<double> lopsided;
    for (int i = 0; i < 600; ++i) lopsided.push_back(-1.0);
    for (int i = 0; i < 400; ++i) lopsided.push_back(1.0);
    const double d2 = levy_distance_to_two_point(lopsided);
    CHECK(d2 == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("distribution helpers") {
    CHECK(kolmogorov_sf(1e-6) == 1.0);
    CHECK(kolmogorov_sf(10.0) < 1e-10);
    CHECK(std::abs(normal_quantile(0.975) - 1.959964) <= 1e-5);
    CHECK(std::abs(normal_quantile(0.5)) <= 1e-9);
    // chi2(1) upper tail at 3.841 is 0.05
    CHECK(std::abs(chi2_sf(3.841458820694124, 1.0) - 0.05) <= 1e-10);
    // chi2(7) upper tail at its 0.999 quantile
    CHECK(std::abs(chi2_sf(24.321886347856854, 7.0) - 0.001) <= 1e-9);
}
