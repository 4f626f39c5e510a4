#include "exitlab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "exitlab/errors.hpp"
#include "exitlab/exit.hpp"
#include "exitlab/model.hpp"

namespace exitlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
    throw ConfigError("config error: field '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) bad_field(key, "not a number: '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_field(key, "not a number: '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) bad_field(key, "not an integer: '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_field(key, "not an integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_field(key, "not a boolean: '" + v + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F parse_one) {
    std::vector<T> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_field(key, "empty list element");
        out.push_back(parse_one(key, item));
    }
    if (out.empty()) bad_field(key, "empty list");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool have_experiment = false;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config error: line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config error: line " + std::to_string(line_no) +
                                           ": missing key");
        if (key == "experiment") { cfg.experiment = value; have_experiment = true; }
        else if (key == "model") cfg.model = value;
        else if (key == "observable") cfg.observable = value;
        else if (key == "n_grid") cfg.n_grid = parse_list<std::uint64_t>(key, value, parse_u64);
        else if (key == "paths") cfg.paths = static_cast<std::size_t>(parse_u64(key, value));
        else if (key == "h0") cfg.h0 = parse_double(key, value);
        else if (key == "detection") cfg.detection = value;
        else if (key == "times") cfg.times = parse_list<double>(key, value, parse_double);
        else if (key == "allow_zero_time") cfg.allow_zero_time = parse_bool(key, value);
        else if (key == "delta") cfg.delta = parse_double(key, value);
        else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
        else if (key == "a_grid") cfg.a_grid = parse_list<double>(key, value, parse_double);
        else if (key == "h_grid") cfg.h_grid = parse_list<double>(key, value, parse_double);
        else if (key == "horizon") cfg.horizon = parse_double(key, value);
        else if (key == "reference_h") cfg.reference_h = parse_double(key, value);
        else if (key == "reference_draws") cfg.reference_draws = static_cast<std::size_t>(parse_u64(key, value));
        else if (key == "reference_csv") cfg.reference_csv = value;
        else if (key == "master_seed") cfg.master_seed = parse_u64(key, value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "workers") cfg.workers = static_cast<unsigned>(parse_u64(key, value));
        else if (key == "ks_threshold") cfg.ks_threshold = parse_double(key, value);
        else if (key == "chi2_threshold") cfg.chi2_threshold = parse_double(key, value);
        else if (key == "exceedance_min") cfg.exceedance_min = parse_double(key, value);
        else if (key == "exceedance_max") cfg.exceedance_max = parse_double(key, value);
        else if (key == "remainder_epsilon") cfg.remainder_epsilon = parse_double(key, value);
        else if (key == "remainder_max_fraction") cfg.remainder_max_fraction = parse_double(key, value);
        else if (key == "levy_threshold") cfg.levy_threshold = parse_double(key, value);
        else if (key == "levy_threshold_v") cfg.levy_threshold_v = parse_double(key, value);
        else if (key == "sign_tolerance") cfg.sign_tolerance = parse_double(key, value);
        else if (key == "mean_abs_tolerance") cfg.mean_abs_tolerance = parse_double(key, value);
        else if (key == "norm_tolerance") cfg.norm_tolerance = parse_double(key, value);
        else if (key == "bins") cfg.bins = static_cast<std::size_t>(parse_u64(key, value));
        else if (key == "control_delta") cfg.control_delta = parse_double(key, value);
        else if (key == "control_h") cfg.control_h = parse_double(key, value);
        else bad_field(key, "unknown key");
    }
    if (!have_experiment) bad_field("experiment", "missing");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
        bad_field("experiment", "unknown experiment '" + cfg.experiment + "'");
    }
    const SdeModel& model = model_by_name(cfg.model);                // throws naming 'model'
    const Observable& obs = observable_by_name(cfg.observable);     // throws naming 'observable'
    if (obs.in_dim != model.dim) {
        bad_field("observable", "observable '" + cfg.observable + "' expects dimension " +
                                    std::to_string(obs.in_dim) + " but model '" + cfg.model +
                                    "' has dimension " + std::to_string(model.dim));
    }
    method_from_name(cfg.detection);  // throws naming 'detection'
    if (cfg.detection == "bridge_corrected" && model.dim != 1) {
        bad_field("detection", "bridge_corrected requires a 1-d model");
    }
    if (cfg.n_grid.empty()) bad_field("n_grid", "must be non-empty");
    for (std::size_t i = 0; i + 1 < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] >= cfg.n_grid[i + 1]) bad_field("n_grid", "must be sorted ascending");
    }
    if (cfg.n_grid.front() == 0) bad_field("n_grid", "entries must be positive");
    if (cfg.paths == 0) bad_field("paths", "must be positive");
    if (cfg.h0 <= 0.0) bad_field("h0", "must be positive");
    double prev = -1.0;
    for (double t : cfg.times) {
        if (t < 0.0) bad_field("times", "must be non-negative");
        if (t <= prev) bad_field("times", "must be strictly increasing");
        prev = t;
        if (t == 0.0 && !cfg.allow_zero_time) {
            bad_field("times", "t = 0 requires allow_zero_time = true");
        }
    }
    if (cfg.allow_zero_time && cfg.experiment != "non_tightness") {
        bad_field("allow_zero_time", "only the non_tightness experiment may evaluate at t = 0");
    }
    if (cfg.experiment == "non_tightness") {
        if (!cfg.allow_zero_time) {
            bad_field("allow_zero_time",
                      "non_tightness evaluates at t = 0 and must declare allow_zero_time = true");
        }
        if (!(cfg.delta > 0.0)) bad_field("delta", "must be positive");
        if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) bad_field("epsilon", "must lie in (0, 1)");
    }
    if (cfg.experiment == "bias_study") {
        if (cfg.h_grid.size() < 2) bad_field("h_grid", "need at least two step sizes");
        for (std::size_t i = 0; i + 1 < cfg.h_grid.size(); ++i) {
            if (cfg.h_grid[i] <= cfg.h_grid[i + 1]) bad_field("h_grid", "must be sorted descending");
        }
        if (model.dim != 1) bad_field("model", "bias_study compares bridge detection, d = 1 only");
    }
    if (cfg.experiment == "martingale_horizon") {
        if (cfg.a_grid.empty()) bad_field("a_grid", "must be non-empty");
        for (std::size_t i = 0; i + 1 < cfg.a_grid.size(); ++i) {
            if (cfg.a_grid[i] >= cfg.a_grid[i + 1]) bad_field("a_grid", "must be sorted ascending");
        }
    }
    if (cfg.experiment == "sphere_uniformity") {
        if (model.dim != 2) bad_field("model", "sphere_uniformity requires a 2-d model");
        if (cfg.bins < 2) bad_field("bins", "must be >= 2");
        if (cfg.paths < 5 * cfg.bins) bad_field("paths", "must be >= 5 * bins");
    }
    if (cfg.reference_h <= 0.0) bad_field("reference_h", "must be positive");
    if (cfg.reference_draws == 0) bad_field("reference_draws", "must be positive");
    if (cfg.out_dir.empty()) bad_field("out_dir", "must be non-empty");
}

std::vector<std::pair<std::string, std::string>> config_snapshot(const ExperimentConfig& cfg) {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto join_u = [](const std::vector<std::uint64_t>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
        return s;
    };
    auto join_d = [&fmt](const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
        return s;
    };
    std::vector<std::pair<std::string, std::string>> snap;
    snap.emplace_back("experiment", cfg.experiment);
    snap.emplace_back("model", cfg.model);
    snap.emplace_back("observable", cfg.observable);
    snap.emplace_back("n_grid", join_u(cfg.n_grid));
    snap.emplace_back("paths", std::to_string(cfg.paths));
    snap.emplace_back("h0", fmt(cfg.h0));
    snap.emplace_back("detection", cfg.detection);
    if (!cfg.times.empty()) snap.emplace_back("times", join_d(cfg.times));
    snap.emplace_back("allow_zero_time", cfg.allow_zero_time ? "true" : "false");
    snap.emplace_back("delta", fmt(cfg.delta));
    snap.emplace_back("epsilon", fmt(cfg.epsilon));
    snap.emplace_back("a_grid", join_d(cfg.a_grid));
    snap.emplace_back("h_grid", join_d(cfg.h_grid));
    snap.emplace_back("horizon", fmt(cfg.horizon));
    snap.emplace_back("reference_h", fmt(cfg.reference_h));
    snap.emplace_back("reference_draws", std::to_string(cfg.reference_draws));
    if (!cfg.reference_csv.empty()) snap.emplace_back("reference_csv", cfg.reference_csv);
    snap.emplace_back("master_seed", std::to_string(cfg.master_seed));
    snap.emplace_back("out_dir", cfg.out_dir);
    snap.emplace_back("workers", std::to_string(cfg.workers));
    snap.emplace_back("ks_threshold", fmt(cfg.ks_threshold));
    snap.emplace_back("chi2_threshold", fmt(cfg.chi2_threshold));
    snap.emplace_back("exceedance_min", fmt(cfg.exceedance_min));
    snap.emplace_back("exceedance_max", fmt(cfg.exceedance_max));
    snap.emplace_back("remainder_epsilon", fmt(cfg.remainder_epsilon));
    snap.emplace_back("remainder_max_fraction", fmt(cfg.remainder_max_fraction));
    snap.emplace_back("levy_threshold", fmt(cfg.levy_threshold));
    snap.emplace_back("levy_threshold_v", fmt(cfg.levy_threshold_v));
    snap.emplace_back("sign_tolerance", fmt(cfg.sign_tolerance));
    snap.emplace_back("mean_abs_tolerance", fmt(cfg.mean_abs_tolerance));
    snap.emplace_back("norm_tolerance", fmt(cfg.norm_tolerance));
    snap.emplace_back("bins", std::to_string(cfg.bins));
    snap.emplace_back("control_delta", fmt(cfg.control_delta));
    snap.emplace_back("control_h", fmt(cfg.control_h));
    return snap;
}

}  // namespace exitlab
