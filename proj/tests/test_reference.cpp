#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "exitlab/errors.hpp"
#include "exitlab/reference.hpp"
#include "exitlab/stats.hpp"

using namespace exitlab;

TEST_CASE("stopped unit-volatility BM in d=1: sign law and mean exit time") {
    Matrix sigma = Matrix::identity(1);
    const auto ref = sample_stopped_sigma_bm(sigma, 20000, 1e-2, 13131313, 0);
    REQUIRE(ref.count() == 20000);
    std::size_t positive = 0;
    double mean_tau = 0.0;
    for (std::size_t i = 0; i < ref.count(); ++i) {
        const double v = ref.values.at(i, 0);
        CHECK(std::abs(std::abs(v) - 1.0) <= 1e-9);
        if (v > 0.0) ++positive;
        mean_tau += ref.taus[i];
    }
    mean_tau /= static_cast<double>(ref.count());
    const double fraction = static_cast<double>(positive) / static_cast<double>(ref.count());
    CHECK(fraction >= 0.485);
    CHECK(fraction <= 0.515);
    CHECK(std::abs(mean_tau - 1.0) <= 0.04);  // E[tau] = 1 oracle, 4 sigma + step bias
}

TEST_CASE("stopped BM in d=2: mean exit time is 1/d") {
    const auto ref = sample_stopped_sigma_bm(Matrix::identity(2), 10000, 5e-3, 777, 0);
    double mean_tau = 0.0;
    for (double t : ref.taus) mean_tau += t;
    mean_tau /= static_cast<double>(ref.taus.size());
    CHECK(std::abs(mean_tau - 0.5) <= 0.02);
}

TEST_CASE("degenerate volatility is rejected") {
    Matrix zero(2, 2);
    CHECK_THROWS_AS(sample_stopped_sigma_bm(zero, 10, 1e-2, 1, 0), ConfigError);
}

TEST_CASE("uniform sphere draws are unit vectors; d=1 reduces to fair signs") {
    const auto s2 = sample_uniform_sphere(2, 5000, 99);
    for (std::size_t i = 0; i < s2.count(); ++i) {
        const double x = s2.values.at(i, 0);
        const double y = s2.values.at(i, 1);
        CHECK(std::abs(std::sqrt(x * x + y * y) - 1.0) <= 1e-12);
    }
    const auto s1 = sample_uniform_sphere(1, 100000, 4242);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < s1.count(); ++i) {
        CHECK(std::abs(s1.values.at(i, 0)) == 1.0);
        if (s1.values.at(i, 0) > 0.0) ++positive;
    }
    const double fraction = static_cast<double>(positive) / static_cast<double>(s1.count());
    CHECK(fraction >= 0.485);
    CHECK(fraction <= 0.515);
}

TEST_CASE("uniform sphere in d=2 passes the angular chi^2 bound") {
    // chi^2(7) 0.999 quantile = 24.32
    const auto s = sample_uniform_sphere(2, 100000, 20260808);
    const TestReport r = chi2_sphere_uniformity(s.values, 8, 0.01);
    CHECK(r.statistic < 24.32);
    CHECK(r.pass);
}

TEST_CASE("two-point sampler: empty, deterministic, balanced") {
    CHECK(exact_two_point(0, 5).count() == 0);
    const auto a = exact_two_point(64, 5);
    const auto b = exact_two_point(64, 5);
    for (std::size_t i = 0; i < 64; ++i) CHECK(a.values.at(i, 0) == b.values.at(i, 0));

    const auto big = exact_two_point(100000, 987);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < big.count(); ++i) {
        CHECK(std::abs(big.values.at(i, 0)) == 1.0);
        if (big.values.at(i, 0) > 0.0) ++positive;
    }
    const double fraction = static_cast<double>(positive) / static_cast<double>(big.count());
    CHECK(fraction >= 0.485);
    CHECK(fraction <= 0.515);
}

TEST_CASE("rotation volatility: exit angles match the uniform sphere law") {
    // two-sample chi^2 homogeneity over 8 angular bins, 1e4 draws each
    const Matrix rot = rotation2d(std::acos(-1.0) / 6.0);
    const auto stopped = sample_stopped_sigma_bm(rot, 10000, 1e-2, 5656, 0);
    const auto sphere = sample_uniform_sphere(2, 10000, 5657);
    const std::size_t bins = 8;
    std::vector<double> c1(bins, 0.0), c2(bins, 0.0);
    auto bin_of = [&](double x, double y) {
        const double angle = std::atan2(y, x);
        double frac = (angle + std::acos(-1.0)) / (2.0 * std::acos(-1.0));
        if (frac >= 1.0) frac = 0.0;
        std::size_t b = static_cast<std::size_t>(frac * bins);
        return b >= bins ? bins - 1 : b;
    };
    for (std::size_t i = 0; i < stopped.count(); ++i) {
        c1[bin_of(stopped.values.at(i, 0), stopped.values.at(i, 1))] += 1.0;
    }
    for (std::size_t i = 0; i < sphere.count(); ++i) {
        c2[bin_of(sphere.values.at(i, 0), sphere.values.at(i, 1))] += 1.0;
    }
    double stat = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double expected = 0.5 * (c1[b] + c2[b]);
        stat += (c1[b] - expected) * (c1[b] - expected) / expected;
        stat += (c2[b] - expected) * (c2[b] - expected) / expected;
    }
    const double p = chi2_sf(stat, static_cast<double>(bins - 1));
    CHECK(p > 0.01);
}

TEST_CASE("reference CSV round-trips bit for bit") {
    const auto ref = sample_stopped_sigma_bm(Matrix::identity(1), 200, 1e-2, 31, 0);
    const std::string path = (std::filesystem::temp_directory_path() / "exitlab_ref_test.csv").string();
    save_reference_csv(ref, path);
    const auto loaded = load_reference_csv(path);
    REQUIRE(loaded.count() == ref.count());
    CHECK(loaded.kind == ref.kind);
    CHECK(loaded.dimension == ref.dimension);
    for (std::size_t i = 0; i < ref.count(); ++i) {
        CHECK(loaded.taus[i] == ref.taus[i]);
        CHECK(loaded.values.at(i, 0) == ref.values.at(i, 0));
    }
    std::filesystem::remove(path);
}
