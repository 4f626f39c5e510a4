#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "exitlab/config.hpp"
#include "exitlab/errors.hpp"

using namespace exitlab;

TEST_CASE("parsing a full config with comments") {
    const std::string text = R"(
# flagship experiment
experiment = example1
model = bm_1d
observable = expm1
n_grid = 100,1000,10000
paths = 500
h0 = 0.01
detection = bridge_corrected
master_seed = 99
out_dir = /tmp/exitlab_cfg_test   # inline comment
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.experiment == "example1");
    CHECK(cfg.n_grid == std::vector<std::uint64_t>{100, 1000, 10000});
    CHECK(cfg.paths == 500);
    CHECK(cfg.h0 == 0.01);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.out_dir == "/tmp/exitlab_cfg_test");
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("unknown keys and malformed values are rejected with the field name") {
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = example1\nbogus = 1\n"),
                         doctest::Contains("field 'bogus'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = example1\npaths = ten\n"),
                         doctest::Contains("field 'paths'"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = example1\npaths\n"), ConfigError);
}

TEST_CASE("validation names the offending field") {
    ExperimentConfig cfg = parse_config_text("experiment = example1\n");
    cfg.model = "unknown_model";
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'model'"), ConfigError);

    cfg = parse_config_text("experiment = example1\n");
    cfg.observable = "identity_2d";  // dimension mismatch with bm_1d
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'observable'"),
                         ConfigError);

    cfg = parse_config_text("experiment = example1\nn_grid = 100,100\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'n_grid'"), ConfigError);

    cfg = parse_config_text("experiment = nope\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'experiment'"),
                         ConfigError);

    cfg = parse_config_text("experiment = example1\ndetection = magic\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'detection'"),
                         ConfigError);
}

TEST_CASE("zero in the time grid requires the explicit declaration") {
    ExperimentConfig cfg = parse_config_text(
        "experiment = fdd_grid\ntimes = 0,0.5,1\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("allow_zero_time"), ConfigError);

    // and the declaration is reserved for non_tightness
    cfg = parse_config_text("experiment = fdd_grid\ntimes = 0.5,1\nallow_zero_time = true\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'allow_zero_time'"),
                         ConfigError);

    cfg = parse_config_text("experiment = non_tightness\nallow_zero_time = true\n");
    CHECK_NOTHROW(validate_config(cfg));

    // non_tightness must state its t = 0 stance explicitly
    cfg = parse_config_text("experiment = non_tightness\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'allow_zero_time'"),
                         ConfigError);
}

TEST_CASE("experiment-specific grids are sanity checked") {
    ExperimentConfig cfg = parse_config_text("experiment = bias_study\nh_grid = 0.001,0.004\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'h_grid'"), ConfigError);

    cfg = parse_config_text("experiment = martingale_horizon\na_grid = 2,1\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'a_grid'"), ConfigError);

    cfg = parse_config_text("experiment = sphere_uniformity\nmodel = bm_1d\n");
    CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("field 'model'"), ConfigError);
}

TEST_CASE("snapshot round-trips through the parser") {
    const ExperimentConfig cfg = parse_config_text(
        "experiment = remainder_ucp\nn_grid = 100,1000\npaths = 42\nh0 = 0.02\n");
    std::string text;
    for (const auto& [k, v] : config_snapshot(cfg)) text += k + " = " + v + "\n";
    const ExperimentConfig back = parse_config_text(text);
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.n_grid == cfg.n_grid);
    CHECK(back.paths == cfg.paths);
    CHECK(back.h0 == cfg.h0);
    CHECK(back.master_seed == cfg.master_seed);
}
