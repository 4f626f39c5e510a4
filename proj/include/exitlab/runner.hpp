#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "exitlab/config.hpp"
#include "exitlab/stats.hpp"

namespace exitlab {

inline constexpr const char* kVersion = "exitlab 0.1.0";

// Everything needed to reproduce a run byte for byte (CSV and report files;
// the manifest itself carries the wall clock and therefore varies).
struct RunManifest {
    std::string version;
    std::string experiment;
    std::uint64_t master_seed = 0;
    std::string out_dir;
    double wall_seconds = 0.0;
    std::vector<std::string> csv_files;  // relative to out_dir
    std::string report_file;             // relative to out_dir
    bool all_passed = false;
    std::vector<std::pair<std::string, std::string>> config;
};

// Validates, simulates, tests, writes per-path CSVs plus report.json and
// manifest.json under config.out_dir, and returns the manifest.
RunManifest run(const ExperimentConfig& config);

RunManifest load_manifest(const std::string& path);

// Tidy long-format curve CSVs (ks-vs-n, exceedance-vs-n, bias-vs-h) written
// next to the manifest's outputs; header-only files when a curve is empty.
void emit_plot_data(const RunManifest& manifest);

// Serialization shared with the CLI and tests.
std::string report_to_json(const std::vector<TestReport>& reports);
std::string format_double(double v);

}  // namespace exitlab
