#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "exitlab/errors.hpp"
#include "exitlab/model.hpp"

using namespace exitlab;

TEST_CASE("catalog models validate and pass the diffusivity probe") {
    const auto names = model_names();
    REQUIRE(names.size() == 5);
    for (const auto& name : names) {
        const SdeModel& m = model_by_name(name);
        CHECK(m.probe.passed);
        CHECK(m.probe.best_min_diag > 0.0);
        CHECK(m.probe.sigma_max > 0.0);
    }
    CHECK(model_by_name("rot_bm_2d").dim == 2);
    CHECK(model_by_name("ou_1d").dim == 1);
}

TEST_CASE("unknown catalog ids name the offending field") {
    CHECK_THROWS_WITH_AS(model_by_name("nope"),
                         doctest::Contains("field 'model'"), ConfigError);
    CHECK_THROWS_WITH_AS(observable_by_name("nope"),
                         doctest::Contains("field 'observable'"), ConfigError);
}

TEST_CASE("probe point set covers the closed unit ball") {
    const std::vector<double> center{0.25, -0.5};
    const auto pts = ball_probe_points(center, 1024);
    CHECK(pts.size() >= 1000);
    bool saw_boundary = false;
    for (const auto& p : pts) {
        const double dx = p[0] - center[0];
        const double dy = p[1] - center[1];
        const double dist = std::sqrt(dx * dx + dy * dy);
        CHECK(dist <= 1.0 + 1e-12);
        if (dist > 1.0 - 1e-12) saw_boundary = true;
    }
    CHECK(saw_boundary);
    // deterministic
    const auto again = ball_probe_points(center, 1024);
    CHECK(again[17][0] == pts[17][0]);
    CHECK(again[17][1] == pts[17][1]);
}

TEST_CASE("diffusivity probe rejects degenerate volatility in the ball") {
    // dX = X dW around x = 1: sigma vanishes at y = 0, which lies in the ball
    SdeModel m;
    m.name = "gbm_test";
    m.dim = 1;
    m.initial = {1.0};
    m.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.diffusion = [](std::span<const double> y, Matrix& out) {
        out = Matrix(1, 1);
        out.at(0, 0) = y[0];
    };
    validate_model(m);
    CHECK(!m.probe.passed);
    CHECK(m.probe.best_min_diag == 0.0);
}

TEST_CASE("analytic Jacobians agree with central differences") {
    const std::vector<double> origin1{0.0};
    const std::vector<double> origin2{0.0, 0.0};
    for (const auto& name : observable_names()) {
        const Observable& o = observable_by_name(name);
        CHECK_NOTHROW(validate_observable(
            o, o.in_dim == 1 ? std::span<const double>(origin1) : std::span<const double>(origin2)));
    }
    // a deliberately wrong Jacobian is caught
    Observable bad = observable_by_name("expm1");
    bad.name = "expm1_bad";
    bad.jacobian_analytic = [](std::span<const double> y, Matrix& out) {
        out.at(0, 0) = std::exp(y[0]) + 0.01;
    };
    CHECK_THROWS_AS(validate_observable(bad, std::span<const double>(origin1)), DomainError);
}

TEST_CASE("FD fallback observable matches the analytic one") {
    const Observable& fd = observable_by_name("expm1_fd");
    const Observable& an = observable_by_name("expm1");
    CHECK(!fd.has_analytic_jacobian());
    const std::vector<double> y{0.37};
    const Matrix jfd = fd.jacobian(y);
    const Matrix jan = an.jacobian(y);
    CHECK(std::abs(jfd.at(0, 0) - jan.at(0, 0)) <= 1e-5 * std::abs(jan.at(0, 0)));
}

TEST_CASE("observable evaluation checks dimensions") {
    const Observable& o = observable_by_name("identity_2d");
    std::vector<double> out(2);
    const std::vector<double> bad_in{1.0};
    CHECK_THROWS_AS(o.eval(bad_in, out), DomainError);
    CHECK(o.hessians.size() == 2);
}

TEST_CASE("rotated model has orthonormal volatility rows") {
    const SdeModel& m = model_by_name("rot_bm_2d");
    Matrix sigma(2, 2);
    m.diffusion(m.initial, sigma);
    for (std::size_t k = 0; k < 2; ++k) {
        double diag = 0.0;
        for (std::size_t j = 0; j < 2; ++j) diag += sigma.at(k, j) * sigma.at(k, j);
        CHECK(std::abs(diag - 1.0) <= 1e-14);
    }
    CHECK(std::abs(sigma.at(0, 0) - std::cos(std::acos(-1.0) / 6.0)) <= 1e-14);
}

TEST_CASE("state-dependent volatility stays within its designed band") {
    const SdeModel& m = model_by_name("statedep_2d");
    Matrix sigma(2, 2);
    for (double y1 : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        const std::vector<double> y{y1, 0.7};
        m.diffusion(y, sigma);
        CHECK(sigma.at(0, 0) >= 1.0);
        CHECK(sigma.at(0, 0) < 2.0);
        CHECK(sigma.at(1, 1) == 1.0);
        CHECK(sigma.at(0, 1) == 0.0);
    }
}
