#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace exitlab {

// Flat, typed key = value experiment description. Defaults depend on the
// experiment; unknown keys are rejected.
struct ExperimentConfig {
    std::string experiment;
    std::string model = "bm_1d";
    std::string observable = "expm1";
    std::vector<std::uint64_t> n_grid{10000};
    std::size_t paths = 10000;
    double h0 = 1e-2;  // step policy: h = h0 * radius^2
    std::string detection = "bridge_corrected";
    std::vector<double> times;  // fdd evaluation grid
    bool allow_zero_time = false;
    double delta = 0.01;    // non_tightness window
    double epsilon = 0.5;   // non_tightness level
    std::vector<double> a_grid{0.5, 1.0, 2.0, 4.0};
    std::vector<double> h_grid{4e-3, 1e-3, 2.5e-4};  // bias_study
    double horizon = 1.0;                            // remainder_ucp window
    double reference_h = 1e-5;
    std::size_t reference_draws = 10000;
    std::string reference_csv;  // optional persisted reference
    std::uint64_t master_seed = 20260808;
    std::string out_dir = "out";
    unsigned workers = 0;  // 0 = hardware concurrency

    // Declared thresholds (recorded in every report as inputs, not facts).
    double ks_threshold = 0.01;
    double chi2_threshold = 0.01;
    double exceedance_min = 0.95;
    double exceedance_max = 0.01;
    double remainder_epsilon = 0.1;
    double remainder_max_fraction = 0.05;
    double levy_threshold = 0.02;
    double levy_threshold_v = 0.05;
    double sign_tolerance = 0.015;
    double mean_abs_tolerance = 0.02;
    double norm_tolerance = 0.02;
    std::size_t bins = 8;
    double control_delta = 1e-4;
    double control_h = 1e-6;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "example1",        "fdd_grid",      "exit_time_law", "sphere_uniformity",
        "non_tightness",   "remainder_ucp", "bias_study",    "martingale_horizon"};
    return names;
}

// Parse "key = value" lines ('#' comments). Unknown keys or malformed values
// throw ConfigError naming the field.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Cross-field checks (ids exist, n_grid ascending, allow_zero_time only for
// non_tightness, ...). Throws ConfigError naming the field.
void validate_config(const ExperimentConfig& config);

// Round-trip snapshot for the manifest, in a fixed key order.
std::vector<std::pair<std::string, std::string>> config_snapshot(const ExperimentConfig& config);

}  // namespace exitlab
