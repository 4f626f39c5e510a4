#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "exitlab/engine.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/stats.hpp"

using namespace exitlab;

namespace {

SdeModel frozen_model(std::size_t d) {
    SdeModel m;
    m.name = "frozen";
    m.dim = d;
    m.initial.assign(d, 0.0);
    m.drift = [d](std::span<const double>, std::span<double> out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
    };
    m.diffusion = [d](std::span<const double>, Matrix& out) { out = Matrix(d, d); };
    m.constant_diffusion = true;
    validate_model(m);
    return m;
}

}  // namespace

TEST_CASE("euler_step: driftless identity diffusion adds the increment") {
    const SdeModel& bm = model_by_name("bm_2d");
    const std::vector<double> s{0.3, -0.2};
    const std::vector<double> w{0.05, 0.11};
    const auto out = euler_step(bm, s, 0.1, w);
    CHECK(out[0] == s[0] + w[0]);
    CHECK(out[1] == s[1] + w[1]);
}

TEST_CASE("euler_step: null step returns the state") {
    const SdeModel& m = model_by_name("statedep_2d");
    const std::vector<double> s{0.4, 0.9};
    const std::vector<double> w{0.0, 0.0};
    const auto out = euler_step(m, s, 0.0, w);
    CHECK(out[0] == s[0]);
    CHECK(out[1] == s[1]);
}

TEST_CASE("euler_step: hand-evaluated mean-reverting step") {
    const SdeModel& ou = model_by_name("ou_1d");
    const std::vector<double> s{1.0};
    const std::vector<double> w{0.0};
    const auto out = euler_step(ou, s, 0.1, w);
    CHECK(out[0] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("euler_step: dimension mismatch and non-finite states are reported") {
    const SdeModel& bm = model_by_name("bm_1d");
    const std::vector<double> s{0.0};
    const std::vector<double> w2{0.0, 0.0};
    CHECK_THROWS_AS(euler_step(bm, s, 0.1, w2), DomainError);

    SdeModel exploding;
    exploding.name = "exploding";
    exploding.dim = 1;
    exploding.initial = {1.0};
    exploding.drift = [](std::span<const double> y, std::span<double> out) {
        out[0] = 1e300 * y[0] * 1e300;
    };
    exploding.diffusion = [](std::span<const double>, Matrix& out) {
        out = Matrix::identity(1);
    };
    const std::vector<double> w{0.0};
    CHECK_THROWS_AS(euler_step(exploding, exploding.initial, 1.0, w), NumericError);
}

TEST_CASE("simulate_on_grid: frozen dynamics give a constant path") {
    const SdeModel m = frozen_model(2);
    const PathGrid path = simulate_on_grid(m, 1.0, 0.1, {1, 2, 0});
    REQUIRE(path.size() == 11);
    CHECK(path.times.front() == 0.0);
    CHECK(path.times.back() >= 1.0 - 1e-12);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path.state(i)[0] == 0.0);
        CHECK(path.state(i)[1] == 0.0);
    }
}

TEST_CASE("simulate_on_grid: identical keys give identical paths") {
    const SdeModel& m = model_by_name("statedep_2d");
    const PathGrid a = simulate_on_grid(m, 0.5, 1e-3, {42, 3, 0});
    const PathGrid b = simulate_on_grid(m, 0.5, 1e-3, {42, 3, 0});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
}

TEST_CASE("simulate_on_grid: BM coordinate variances at t=1 sit in the MC band") {
    // exact Var = 1 per coordinate; 1e5 paths at h = 0.01
    const SdeModel& bm = model_by_name("bm_2d");
    const std::size_t n_paths = 100000;
    std::vector<double> x(n_paths), y(n_paths);
    parallel_for_indexed(n_paths, 0, [&](std::size_t i) {
        const PathGrid p = simulate_on_grid(bm, 1.0, 0.01, {777, i, 0});
        x[i] = p.state(p.size() - 1)[0];
        y[i] = p.state(p.size() - 1)[1];
    });
    for (const auto& coord : {x, y}) {
        double mean = 0.0;
        for (double v : coord) mean += v;
        mean /= static_cast<double>(n_paths);
        double var = 0.0;
        for (double v : coord) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n_paths - 1);
        CHECK(var >= 0.97);
        CHECK(var <= 1.03);
    }
}

TEST_CASE("simulate_until_exit: no motion never exits") {
    const SdeModel m = frozen_model(1);
    ExitSimOptions opt;
    opt.max_time = 1.0;
    CHECK_THROWS_AS(simulate_until_exit(m, m.initial, 1.0, 0.01, {1, 1, 0}, opt), TimeoutError);
}

TEST_CASE("simulate_until_exit: determinism and the exit-record invariants") {
    const SdeModel& bm = model_by_name("bm_1d");
    ExitSimOptions opt;
    opt.method = DetectionMethod::bridge_corrected;
    const ExitRecord a = simulate_until_exit(bm, bm.initial, 0.5, 1e-3, {9, 4, 0}, opt);
    const ExitRecord b = simulate_until_exit(bm, bm.initial, 0.5, 1e-3, {9, 4, 0}, opt);
    CHECK(a.exit_time == b.exit_time);
    CHECK(a.exit_state[0] == b.exit_state[0]);
    CHECK(std::abs(std::abs(a.exit_state[0]) - 0.5) <= 1e-9 * 0.5);
    // interior grid points strictly inside, last point is the exit state
    for (std::size_t i = 0; i + 1 < a.pre_exit_grid.size(); ++i) {
        CHECK(std::abs(a.pre_exit_grid.state(i)[0]) < 0.5);
    }
    CHECK(a.pre_exit_grid.times.back() == a.exit_time);
}

TEST_CASE("mean exit times match the optional-stopping oracles (smoke scale)") {
    // E[tau] = 1 for d=1 from radius 1; E[tau] = 1/2 for d=2
    const std::size_t n_paths = 5000;
    {
        const SdeModel& bm = model_by_name("bm_1d");
        std::vector<double> taus(n_paths);
        parallel_for_indexed(n_paths, 0, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = DetectionMethod::bridge_corrected;
            opt.keep_grid = false;
            taus[i] = simulate_until_exit(bm, bm.initial, 1.0, 1e-3, {2024, i, 0}, opt).exit_time;
        });
        const auto [mean, hw] = mean_with_ci(taus, 0.95);
        CHECK(std::abs(mean - 1.0) <= 0.055);  // 4 sigma * 0.816/sqrt(5000) + bridge residual
    }
    {
        const SdeModel& bm = model_by_name("bm_2d");
        std::vector<double> taus(n_paths);
        parallel_for_indexed(n_paths, 0, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = DetectionMethod::substepped;
            opt.keep_grid = false;
            taus[i] = simulate_until_exit(bm, bm.initial, 1.0, 1e-3, {2025, i, 0}, opt).exit_time;
        });
        const auto [mean, hw] = mean_with_ci(taus, 0.95);
        CHECK(std::abs(mean - 0.5) <= 0.02);  // 4 sigma * 0.29/sqrt(5000) + substep residual
    }
}

TEST_CASE("strong-error sanity: halving h shrinks the endpoint gap for dX = X dW") {
    SdeModel gbm;
    gbm.name = "gbm";
    gbm.dim = 1;
    gbm.initial = {1.0};
    gbm.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    gbm.diffusion = [](std::span<const double> y, Matrix& out) {
        out = Matrix(1, 1);
        out.at(0, 0) = y[0];
    };

    auto rms_gap = [&](double h, std::size_t n_paths) {
        double sum_sq = 0.0;
        const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / h));
        for (std::size_t i = 0; i < n_paths; ++i) {
            // fine increments at h/2; coarse increments are pairwise sums
            const auto fine = gaussian_increments({31337, i, 0}, 2 * steps, h / 2.0);
            std::vector<double> coarse(1), finev(1);
            coarse[0] = finev[0] = 1.0;
            for (std::size_t k = 0; k < steps; ++k) {
                const double dw = fine[2 * k] + fine[2 * k + 1];
                coarse = euler_step(gbm, coarse, h, std::vector<double>{dw});
                finev = euler_step(gbm, finev, h / 2.0,
                                   std::vector<double>{fine[2 * k]});
                finev = euler_step(gbm, finev, h / 2.0,
                                   std::vector<double>{fine[2 * k + 1]});
            }
            sum_sq += (coarse[0] - finev[0]) * (coarse[0] - finev[0]);
        }
        return std::sqrt(sum_sq / static_cast<double>(n_paths));
    };
    const double gap_coarse = rms_gap(0.02, 400);
    const double gap_fine = rms_gap(0.01, 400);
    CHECK(gap_fine < gap_coarse);
}

TEST_CASE("BM scaling identity: law of n tau is invariant in n") {
    // exact in law by Brownian scaling; the discretization at h = h0 r^2
    // scales along with it, so the two samples agree as distributions
    const SdeModel& bm = model_by_name("bm_1d");
    const std::size_t n_paths = 10000;
    std::vector<double> small_n(n_paths), large_n(n_paths);
    parallel_for_indexed(n_paths, 0, [&](std::size_t i) {
        ExitSimOptions opt;
        opt.method = DetectionMethod::naive;
        opt.keep_grid = false;
        const double r1 = radius_for_scale(1);
        small_n[i] = 1.0 * simulate_until_exit(bm, bm.initial, r1, 0.01 * r1 * r1,
                                               {555, i, 0}, opt)
                               .exit_time;
        const double r_large = radius_for_scale(10000);
        large_n[i] = 10000.0 * simulate_until_exit(bm, bm.initial, r_large,
                                                   0.01 * r_large * r_large, {556, i, 0}, opt)
                                   .exit_time;
    });
    const TestReport ks = ks_two_sample(small_n, large_n, 0.01);
    CHECK(*ks.p_value > 0.01);
}

TEST_CASE("stopped lookup freezes at the exit state") {
    const SdeModel& bm = model_by_name("bm_1d");
    ExitSimOptions opt;
    opt.method = DetectionMethod::naive;
    const ExitRecord rec = simulate_until_exit(bm, bm.initial, 0.3, 1e-3, {60, 1, 0}, opt);
    CHECK(stopped_state_at(rec, rec.exit_time)[0] == rec.exit_state[0]);
    CHECK(stopped_state_at(rec, rec.exit_time + 5.0)[0] == rec.exit_state[0]);
    CHECK(stopped_state_at(rec, 0.0)[0] == 0.0);
}
