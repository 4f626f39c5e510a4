#include "exitlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "exitlab/engine.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/model.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/reference.hpp"
#include "exitlab/scaling.hpp"
#include "exitlab/simd/kernels.hpp"

namespace exitlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

namespace {

class CsvWriter {
  public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
        if (!os_) throw IoError("cannot open output file: " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << "\n";
    }
    CsvWriter& field(double v) {
        sep();
        os_ << format_double(v);
        return *this;
    }
    CsvWriter& field(std::uint64_t v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& field(const std::string& v) {
        sep();
        os_ << v;
        return *this;
    }
    void end_row() {
        os_ << "\n";
        first_ = true;
    }
    void close(const fs::path& path) {
        os_.flush();
        if (!os_) throw IoError("failed writing output file: " + path.string());
    }

  private:
    void sep() {
        if (!first_) os_ << ",";
        first_ = false;
    }
    std::ofstream os_;
    bool first_ = true;
};

void add_provenance(TestReport& r, std::uint64_t n, double h, const ExperimentConfig& cfg) {
    r.add_meta("n", std::to_string(n));
    r.add_meta("h", format_double(h));
    r.add_meta("method", cfg.detection);
    r.add_meta("seed", std::to_string(cfg.master_seed));
}

TestReport informational(std::string name, double statistic) {
    TestReport r;
    r.test_name = std::move(name);
    r.rule = "informational";
    r.statistic = statistic;
    r.pass = true;
    return r;
}

TestReport band_report(std::string name, double statistic, double target, double tolerance) {
    TestReport r;
    r.test_name = std::move(name);
    r.rule = "|statistic - " + format_double(target) + "| <= threshold";
    r.statistic = statistic;
    r.threshold = tolerance;
    r.pass = std::abs(statistic - target) <= tolerance;
    return r;
}

TestReport upper_bound_report(std::string name, double statistic, double threshold,
                              std::string rule = "statistic <= threshold") {
    TestReport r;
    r.test_name = std::move(name);
    r.rule = std::move(rule);
    r.statistic = statistic;
    r.threshold = threshold;
    r.pass = statistic <= threshold;
    return r;
}

double max_consecutive_increase(std::span<const double> values) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        worst = std::max(worst, values[i + 1] - values[i]);
    }
    return worst;
}

std::string n_tag(std::uint64_t n) { return "n" + std::to_string(n); }

struct ExperimentContext {
    const ExperimentConfig& cfg;
    const SdeModel& model;
    const Observable& obs;
    fs::path out;
    std::vector<TestReport>& reports;
    std::vector<std::string>& csv_files;
};

// ---------------------------------------------------------------------------
// example1: sign law and magnitude of the scaled exit values
// ---------------------------------------------------------------------------

void run_example1(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    for (std::uint64_t n : cfg.n_grid) {
        const double r = radius_for_scale(n);
        const double h = cfg.h0 * r * r;
        struct Row {
            double tau, n_tau, value;
        };
        std::vector<Row> rows(cfg.paths);
        parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = method;
            opt.keep_grid = false;
            const StreamKey key{cfg.master_seed, i, kMainSubstream};
            const ExitRecord rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
            const auto sample = scaled_stopped_values(n, ctx.obs, rec, ctx.model, {});
            rows[i] = {rec.exit_time, sample.exit_time_scaled, sample.exit_value[0]};
        });

        const std::string csv_name = "example1_paths_" + n_tag(n) + ".csv";
        CsvWriter csv(ctx.out / csv_name,
                      {"n", "path_index", "h", "method", "seed", "tau", "n_tau", "exit_value"});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
                .field(cfg.master_seed).field(rows[i].tau).field(rows[i].n_tau)
                .field(rows[i].value);
            csv.end_row();
        }
        csv.close(ctx.out / csv_name);
        ctx.csv_files.push_back(csv_name);

        std::size_t positive = 0;
        double mean_abs = 0.0;
        for (const Row& row : rows) {
            if (row.value > 0.0) ++positive;
            mean_abs += std::abs(row.value);
        }
        mean_abs /= static_cast<double>(rows.size());
        const double fraction = static_cast<double>(positive) / static_cast<double>(rows.size());

        TestReport sign = band_report("example1_sign_fraction_" + n_tag(n), fraction, 0.5,
                                      cfg.sign_tolerance);
        sign.sample_size1 = rows.size();
        add_provenance(sign, n, h, cfg);
        ctx.reports.push_back(std::move(sign));

        TestReport mag = band_report("example1_mean_abs_" + n_tag(n), mean_abs, 1.0,
                                     cfg.mean_abs_tolerance);
        mag.sample_size1 = rows.size();
        add_provenance(mag, n, h, cfg);
        ctx.reports.push_back(std::move(mag));
    }
}

// ---------------------------------------------------------------------------
// fdd_grid: scaled stopped values on a time grid vs the two-point limit law
// ---------------------------------------------------------------------------

void run_fdd_grid(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    const std::vector<double>& times = cfg.times;
    if (times.empty()) throw ConfigError("config error: field 'times': fdd_grid needs a time grid");
    const ReferenceSample ref = exact_two_point(cfg.paths, cfg.master_seed);
    std::vector<double> ref_values(ref.count());
    for (std::size_t i = 0; i < ref.count(); ++i) ref_values[i] = ref.values.at(i, 0);

    // levy distance per (n, time), indexed [time][n]
    std::vector<std::vector<double>> levy_curves(times.size());

    for (std::uint64_t n : cfg.n_grid) {
        const double r = radius_for_scale(n);
        const double h = cfg.h0 * r * r;
        struct Row {
            double tau, n_tau, exit_value;
            std::vector<double> y;
        };
        std::vector<Row> rows(cfg.paths);
        parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = method;
            const StreamKey key{cfg.master_seed, i, kMainSubstream};
            const ExitRecord rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
            const auto sample = scaled_stopped_values(n, ctx.obs, rec, ctx.model, times);
            Row row;
            row.tau = rec.exit_time;
            row.n_tau = sample.exit_time_scaled;
            row.exit_value = sample.exit_value[0];
            row.y.resize(times.size());
            for (std::size_t j = 0; j < times.size(); ++j) row.y[j] = sample.values.at(j, 0);
            rows[i] = std::move(row);
        });

        std::vector<std::string> header{"n",   "path_index", "h",    "method",
                                        "seed", "tau",        "n_tau", "exit_value"};
        for (double t : times) header.push_back("y_t" + format_double(t));
        const std::string csv_name = "fdd_grid_paths_" + n_tag(n) + ".csv";
        CsvWriter csv(ctx.out / csv_name, header);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
                .field(cfg.master_seed).field(rows[i].tau).field(rows[i].n_tau)
                .field(rows[i].exit_value);
            for (double y : rows[i].y) csv.field(y);
            csv.end_row();
        }
        csv.close(ctx.out / csv_name);
        ctx.csv_files.push_back(csv_name);

        std::vector<double> column(rows.size());
        for (std::size_t j = 0; j < times.size(); ++j) {
            for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i].y[j];
            const double levy = levy_distance_to_two_point(column);
            const double ks_raw = ks_statistic(column, ref_values);
            levy_curves[j].push_back(levy);

            TestReport info = informational(
                "fdd_levy_" + n_tag(n) + "_t" + format_double(times[j]), levy);
            info.sample_size1 = column.size();
            info.sample_size2 = ref_values.size();
            add_provenance(info, n, h, cfg);
            info.add_meta("t", format_double(times[j]));
            info.add_meta("ks_raw", format_double(ks_raw));
            info.add_meta("curve", "ks_vs_n");
            ctx.reports.push_back(std::move(info));
        }
    }

    for (std::size_t j = 0; j < times.size(); ++j) {
        const double h_final = cfg.h0 / static_cast<double>(cfg.n_grid.back());
        TestReport final_r = upper_bound_report(
            "fdd_levy_final_t" + format_double(times[j]), levy_curves[j].back(),
            cfg.levy_threshold);
        final_r.sample_size1 = cfg.paths;
        add_provenance(final_r, cfg.n_grid.back(), h_final, cfg);
        final_r.add_meta("t", format_double(times[j]));
        ctx.reports.push_back(std::move(final_r));

        TestReport mono = upper_bound_report(
            "fdd_levy_monotone_t" + format_double(times[j]),
            max_consecutive_increase(levy_curves[j]), 0.0,
            "max consecutive increase across n_grid <= threshold");
        mono.sample_size1 = cfg.paths;
        add_provenance(mono, cfg.n_grid.back(), h_final, cfg);
        mono.add_meta("t", format_double(times[j]));
        ctx.reports.push_back(std::move(mono));
    }
}

// ---------------------------------------------------------------------------
// exit_time_law: law of n tau vs the fine-step unit-ball reference, plus the
// exact path-wise time-scaling identity
// ---------------------------------------------------------------------------

ReferenceSample exit_time_reference(const ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    if (!cfg.reference_csv.empty() && fs::exists(cfg.reference_csv)) {
        return load_reference_csv(cfg.reference_csv);
    }
    Matrix sigma(ctx.model.dim, ctx.model.dim);
    ctx.model.diffusion(ctx.model.initial, sigma);
    ReferenceSample ref = sample_stopped_sigma_bm(sigma, cfg.reference_draws, cfg.reference_h,
                                                  cfg.master_seed, cfg.workers);
    if (!cfg.reference_csv.empty()) save_reference_csv(ref, cfg.reference_csv);
    return ref;
}

void run_exit_time_law(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    const ReferenceSample ref = exit_time_reference(ctx);
    const std::uint64_t n = cfg.n_grid.back();
    const double r = radius_for_scale(n);
    const double h = cfg.h0 * r * r;

    struct Row {
        double tau, n_tau, tau_naive;
        bool identity_ok;
    };
    std::vector<Row> rows(cfg.paths);
    parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
        const StreamKey key{cfg.master_seed, i, kMainSubstream};
        ExitSimOptions opt;
        opt.method = method;
        opt.keep_grid = false;
        const ExitRecord rec = simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);

        // identity check on the raw naive grid: n tau equals the unit-ball
        // exit time of the time-scaled path, bit for bit
        PathGrid raw;
        ExitSimOptions naive_opt;
        naive_opt.method = DetectionMethod::naive;
        naive_opt.keep_grid = false;
        naive_opt.raw_grid_out = &raw;
        const ExitRecord naive_rec =
            simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, naive_opt);
        const PathGrid scaled = time_scaled_path(n, raw, ctx.model.initial);
        std::vector<double> origin(ctx.model.dim, 0.0);
        const auto scaled_exit =
            detect_exit(scaled, origin, 1.0, DetectionMethod::naive, key, ctx.model);
        const double n_tau_direct = static_cast<double>(n) * naive_rec.exit_time;
        const bool ok = scaled_exit.has_value() && scaled_exit->exit_time == n_tau_direct;

        rows[i] = {rec.exit_time, static_cast<double>(n) * rec.exit_time, naive_rec.exit_time, ok};
    });

    const std::string csv_name = "exit_time_law_paths_" + n_tag(n) + ".csv";
    CsvWriter csv(ctx.out / csv_name, {"n", "path_index", "h", "method", "seed", "tau", "n_tau",
                                       "tau_naive", "identity_ok"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
            .field(cfg.master_seed).field(rows[i].tau).field(rows[i].n_tau)
            .field(rows[i].tau_naive)
            .field(static_cast<std::uint64_t>(rows[i].identity_ok ? 1 : 0));
        csv.end_row();
    }
    csv.close(ctx.out / csv_name);
    ctx.csv_files.push_back(csv_name);

    std::vector<double> n_taus(rows.size());
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        n_taus[i] = rows[i].n_tau;
        if (!rows[i].identity_ok) ++mismatches;
    }
    TestReport ks = ks_two_sample(n_taus, ref.taus, cfg.ks_threshold);
    ks.test_name = "exit_time_law_ks";
    add_provenance(ks, n, h, cfg);
    ks.add_meta("reference_h", format_double(cfg.reference_h));
    ks.add_meta("curve", "ks_vs_n");
    ctx.reports.push_back(std::move(ks));

    TestReport identity = upper_bound_report("exit_time_scaling_identity",
                                             static_cast<double>(mismatches), 0.0,
                                             "mismatching paths <= threshold");
    identity.sample_size1 = rows.size();
    add_provenance(identity, n, h, cfg);
    ctx.reports.push_back(std::move(identity));
}

// ---------------------------------------------------------------------------
// sphere_uniformity: angular law and norm of the scaled exit positions
// ---------------------------------------------------------------------------

void run_sphere_uniformity(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    const std::uint64_t n = cfg.n_grid.back();
    const double r = radius_for_scale(n);
    const double h = cfg.h0 * r * r;

    struct Row {
        double tau, ex, ey, zx, zy;
    };
    std::vector<Row> rows(cfg.paths);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
        ExitSimOptions opt;
        opt.method = method;
        opt.keep_grid = false;
        const StreamKey key{cfg.master_seed, i, kMainSubstream};
        const ExitRecord rec = simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
        const double zx = sqrt_n * (rec.exit_state[0] - ctx.model.initial[0]);
        const double zy = sqrt_n * (rec.exit_state[1] - ctx.model.initial[1]);
        rows[i] = {rec.exit_time, rec.exit_state[0], rec.exit_state[1], zx, zy};
    });

    const std::string csv_name = "sphere_uniformity_paths_" + n_tag(n) + ".csv";
    CsvWriter csv(ctx.out / csv_name, {"n", "path_index", "h", "method", "seed", "tau", "exit_x",
                                       "exit_y", "z_x", "z_y", "angle", "norm"});
    Matrix values(rows.size(), 2);
    double worst_norm_dev = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double nrm = std::sqrt(rows[i].zx * rows[i].zx + rows[i].zy * rows[i].zy);
        const double angle = std::atan2(rows[i].zy, rows[i].zx);
        values.at(i, 0) = rows[i].zx / nrm;  // exact unit vectors for the binning
        values.at(i, 1) = rows[i].zy / nrm;
        worst_norm_dev = std::max(worst_norm_dev, std::abs(nrm - 1.0));
        csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
            .field(cfg.master_seed).field(rows[i].tau).field(rows[i].ex).field(rows[i].ey)
            .field(rows[i].zx).field(rows[i].zy).field(angle).field(nrm);
        csv.end_row();
    }
    csv.close(ctx.out / csv_name);
    ctx.csv_files.push_back(csv_name);

    TestReport chi2 = chi2_sphere_uniformity(values, cfg.bins, cfg.chi2_threshold);
    chi2.test_name = "sphere_uniformity_chi2";
    add_provenance(chi2, n, h, cfg);
    ctx.reports.push_back(std::move(chi2));

    TestReport norm_dev = upper_bound_report("sphere_uniformity_norm_dev", worst_norm_dev,
                                             cfg.norm_tolerance,
                                             "max |norm - 1| <= threshold");
    norm_dev.sample_size1 = rows.size();
    add_provenance(norm_dev, n, h, cfg);
    ctx.reports.push_back(std::move(norm_dev));
}

// ---------------------------------------------------------------------------
// non_tightness: Y^n_0 = 0 exactly while sup_{t<=delta} |Y^n_t| explodes;
// unstopped unscaled BM control stays small
// ---------------------------------------------------------------------------

void run_non_tightness(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    const std::uint64_t n = cfg.n_grid.back();
    const double r = radius_for_scale(n);
    const double h = cfg.h0 * r * r;
    const std::vector<double> zero_grid{0.0};

    struct Row {
        double tau, y0, sup;
    };
    std::vector<Row> rows(cfg.paths);
    parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
        ExitSimOptions opt;
        opt.method = method;
        const StreamKey key{cfg.master_seed, i, kMainSubstream};
        const ExitRecord rec = simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
        const auto at_zero = scaled_stopped_values(n, ctx.obs, rec, ctx.model, zero_grid);
        const double sup = scaled_sup_norm(n, ctx.obs, rec, ctx.model, cfg.delta);
        rows[i] = {rec.exit_time, at_zero.values.at(0, 0), sup};
    });

    const std::string csv_name = "non_tightness_paths_" + n_tag(n) + ".csv";
    CsvWriter csv(ctx.out / csv_name,
                  {"n", "path_index", "h", "method", "seed", "tau", "y0", "sup_y"});
    std::vector<double> sups(rows.size());
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sups[i] = rows[i].sup;
        if (rows[i].y0 != 0.0) ++nonzero;
        csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
            .field(cfg.master_seed).field(rows[i].tau).field(rows[i].y0).field(rows[i].sup);
        csv.end_row();
    }
    csv.close(ctx.out / csv_name);
    ctx.csv_files.push_back(csv_name);

    TestReport zero = upper_bound_report("non_tightness_y0_zero", static_cast<double>(nonzero),
                                         0.0, "paths with Y_0 != 0 <= threshold");
    zero.sample_size1 = rows.size();
    add_provenance(zero, n, h, cfg);
    ctx.reports.push_back(std::move(zero));

    TestReport exceed = tightness_diagnostic(sups, cfg.epsilon, cfg.exceedance_min, true);
    exceed.test_name = "non_tightness_exceedance";
    add_provenance(exceed, n, h, cfg);
    exceed.add_meta("delta", format_double(cfg.delta));
    exceed.add_meta("curve", "exceedance_vs_n");
    ctx.reports.push_back(std::move(exceed));

    // control: unstopped, unscaled BM over [0, control_delta]
    const SdeModel& bm = model_by_name("bm_1d");
    std::vector<double> control_sups(cfg.paths);
    parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
        const StreamKey key{cfg.master_seed, kControlPathBase + i, kMainSubstream};
        const PathGrid path = simulate_on_grid(bm, cfg.control_delta, cfg.control_h, key);
        control_sups[i] = simd::max_abs_dev_1d(path.states.data(), path.states.size(), 0.0);
    });
    const std::string control_csv = "non_tightness_control.csv";
    CsvWriter ccsv(ctx.out / control_csv, {"path_index", "h", "seed", "sup_w"});
    for (std::size_t i = 0; i < control_sups.size(); ++i) {
        ccsv.field(static_cast<std::uint64_t>(i)).field(cfg.control_h).field(cfg.master_seed)
            .field(control_sups[i]);
        ccsv.end_row();
    }
    ccsv.close(ctx.out / control_csv);
    ctx.csv_files.push_back(control_csv);

    TestReport control = tightness_diagnostic(control_sups, cfg.epsilon, cfg.exceedance_max, false);
    control.test_name = "non_tightness_control";
    add_provenance(control, 1, cfg.control_h, cfg);
    control.add_meta("delta", format_double(cfg.control_delta));
    ctx.reports.push_back(std::move(control));
}

// ---------------------------------------------------------------------------
// remainder_ucp: sup of the first-order Taylor remainder of the scaled
// stopped observable
// ---------------------------------------------------------------------------

void run_remainder_ucp(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);
    std::vector<double> fractions;
    for (std::uint64_t n : cfg.n_grid) {
        const double r = radius_for_scale(n);
        const double h = cfg.h0 * r * r;
        struct Row {
            double tau, sup;
        };
        std::vector<Row> rows(cfg.paths);
        parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = method;
            const StreamKey key{cfg.master_seed, i, kMainSubstream};
            const ExitRecord rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
            const RemainderSample rem = remainder_sup(n, ctx.obs, rec, ctx.model, cfg.horizon);
            rows[i] = {rec.exit_time, rem.sup_norm};
        });

        const std::string csv_name = "remainder_ucp_paths_" + n_tag(n) + ".csv";
        CsvWriter csv(ctx.out / csv_name,
                      {"n", "path_index", "h", "method", "seed", "tau", "sup_remainder"});
        std::size_t exceed = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].sup > cfg.remainder_epsilon) ++exceed;
            csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
                .field(cfg.master_seed).field(rows[i].tau).field(rows[i].sup);
            csv.end_row();
        }
        csv.close(ctx.out / csv_name);
        ctx.csv_files.push_back(csv_name);

        const double fraction = static_cast<double>(exceed) / static_cast<double>(rows.size());
        fractions.push_back(fraction);
        TestReport info = informational("remainder_fraction_" + n_tag(n), fraction);
        info.sample_size1 = rows.size();
        add_provenance(info, n, h, cfg);
        info.add_meta("remainder_epsilon", format_double(cfg.remainder_epsilon));
        info.add_meta("curve", "exceedance_vs_n");
        ctx.reports.push_back(std::move(info));
    }

    const double h_final = cfg.h0 / static_cast<double>(cfg.n_grid.back());
    TestReport final_r = upper_bound_report("remainder_fraction_final", fractions.back(),
                                            cfg.remainder_max_fraction);
    final_r.sample_size1 = cfg.paths;
    add_provenance(final_r, cfg.n_grid.back(), h_final, cfg);
    ctx.reports.push_back(std::move(final_r));

    TestReport mono = upper_bound_report("remainder_fraction_monotone",
                                         max_consecutive_increase(fractions), 0.0,
                                         "max consecutive increase across n_grid <= threshold");
    mono.sample_size1 = cfg.paths;
    add_provenance(mono, cfg.n_grid.back(), h_final, cfg);
    ctx.reports.push_back(std::move(mono));
}

// ---------------------------------------------------------------------------
// bias_study: order of the naive detection bias in h and the bridge
// correction's gain
// ---------------------------------------------------------------------------

void run_bias_study(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const double r = 1.0;  // unit ball, E[tau] = 1 oracle scale
    struct Row {
        double tau_naive, tau_bridge;
    };
    std::vector<std::vector<Row>> all_rows(cfg.h_grid.size());
    for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        const double h = cfg.h_grid[hi];
        all_rows[hi].resize(cfg.paths);
        auto& rows = all_rows[hi];
        parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
            const StreamKey key{cfg.master_seed, hi * cfg.paths + i, kMainSubstream};
            ExitSimOptions naive_opt;
            naive_opt.method = DetectionMethod::naive;
            naive_opt.keep_grid = false;
            ExitSimOptions bridge_opt;
            bridge_opt.method = DetectionMethod::bridge_corrected;
            bridge_opt.keep_grid = false;
            const ExitRecord naive_rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, naive_opt);
            const ExitRecord bridge_rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, bridge_opt);
            rows[i] = {naive_rec.exit_time, bridge_rec.exit_time};
        });
    }

    const std::string csv_name = "bias_study_paths.csv";
    CsvWriter csv(ctx.out / csv_name,
                  {"h", "path_index", "seed", "tau_naive", "tau_bridge"});
    for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        for (std::size_t i = 0; i < all_rows[hi].size(); ++i) {
            csv.field(cfg.h_grid[hi]).field(static_cast<std::uint64_t>(i)).field(cfg.master_seed)
                .field(all_rows[hi][i].tau_naive).field(all_rows[hi][i].tau_bridge);
            csv.end_row();
        }
    }
    csv.close(ctx.out / csv_name);
    ctx.csv_files.push_back(csv_name);

    std::vector<double> naive_mean(cfg.h_grid.size(), 0.0), bridge_mean(cfg.h_grid.size(), 0.0);
    for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        for (const Row& row : all_rows[hi]) {
            naive_mean[hi] += row.tau_naive;
            bridge_mean[hi] += row.tau_bridge;
        }
        naive_mean[hi] /= static_cast<double>(cfg.paths);
        bridge_mean[hi] /= static_cast<double>(cfg.paths);
    }
    const double truth = bridge_mean.back();  // corrected estimate at the finest h

    std::vector<double> log_h, log_bias;
    bool bias_positive = true;
    for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        const double bias = naive_mean[hi] - truth;
        TestReport info = informational("bias_naive_h" + format_double(cfg.h_grid[hi]), bias);
        info.sample_size1 = cfg.paths;
        add_provenance(info, 1, cfg.h_grid[hi], cfg);
        info.add_meta("naive_mean", format_double(naive_mean[hi]));
        info.add_meta("bridge_mean", format_double(bridge_mean[hi]));
        info.add_meta("curve", "bias_vs_h");
        ctx.reports.push_back(std::move(info));
        if (bias <= 0.0) bias_positive = false;
        else {
            log_h.push_back(std::log(cfg.h_grid[hi]));
            log_bias.push_back(std::log(bias));
        }
    }

    double slope = std::numeric_limits<double>::quiet_NaN();
    if (bias_positive && log_h.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < log_h.size(); ++i) {
            mx += log_h[i];
            my += log_bias[i];
        }
        mx /= static_cast<double>(log_h.size());
        my /= static_cast<double>(log_h.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < log_h.size(); ++i) {
            num += (log_h[i] - mx) * (log_bias[i] - my);
            den += (log_h[i] - mx) * (log_h[i] - mx);
        }
        slope = num / den;
    }
    TestReport slope_r = band_report("bias_slope", slope, 0.5, 0.15);
    slope_r.sample_size1 = cfg.paths;
    add_provenance(slope_r, 1, cfg.h_grid.back(), cfg);
    ctx.reports.push_back(std::move(slope_r));

    const std::size_t mid = cfg.h_grid.size() >= 2 ? cfg.h_grid.size() - 2 : 0;
    const double corrected_bias_mid = std::abs(bridge_mean[mid] - truth);
    const double naive_bias_fine = naive_mean.back() - truth;
    TestReport gain = upper_bound_report("bias_corrected_vs_naive",
                                         corrected_bias_mid - naive_bias_fine, 0.0,
                                         "corrected bias (second-finest h) - naive bias "
                                         "(finest h) <= threshold");
    gain.sample_size1 = cfg.paths;
    add_provenance(gain, 1, cfg.h_grid[mid], cfg);
    gain.add_meta("corrected_bias", format_double(corrected_bias_mid));
    gain.add_meta("naive_bias_finest", format_double(naive_bias_fine));
    ctx.reports.push_back(std::move(gain));
}

// ---------------------------------------------------------------------------
// martingale_horizon: truncated stochastic-integral convergence in the
// horizon, and the law of its limit across n
// ---------------------------------------------------------------------------

void run_martingale_horizon(ExperimentContext& ctx) {
    const auto& cfg = ctx.cfg;
    const DetectionMethod method = method_from_name(cfg.detection);

    // ||grad f_k . sigma|| over the unit ball around x, for the gap bound
    double grad_scale = 0.0;
    {
        const auto pts = ball_probe_points(ctx.model.initial, 512);
        Matrix sigma(ctx.model.dim, ctx.model.dim);
        std::vector<double> row(ctx.model.dim);
        for (const auto& p : pts) {
            const Matrix jac = ctx.obs.jacobian(p);
            ctx.model.diffusion(p, sigma);
            for (std::size_t k = 0; k < ctx.obs.out_dim; ++k) {
                for (std::size_t j = 0; j < ctx.model.dim; ++j) {
                    double acc = 0.0;
                    for (std::size_t m = 0; m < ctx.model.dim; ++m) {
                        acc += jac.at(k, m) * sigma.at(m, j);
                    }
                    row[j] = acc;
                }
                grad_scale = std::max(grad_scale, norm(row));
            }
        }
    }

    for (std::uint64_t n : cfg.n_grid) {
        const double r = radius_for_scale(n);
        const double h = cfg.h0 * r * r;
        struct Row {
            double tau, v;
            std::vector<double> f_a;
        };
        std::vector<Row> rows(cfg.paths);
        parallel_for_indexed(cfg.paths, cfg.workers, [&](std::size_t i) {
            ExitSimOptions opt;
            opt.method = method;
            std::vector<double> incs;
            opt.increments_out = &incs;
            const StreamKey key{cfg.master_seed, i, kMainSubstream};
            const ExitRecord rec =
                simulate_until_exit(ctx.model, ctx.model.initial, r, h, key, opt);
            Row row;
            row.tau = rec.exit_time;
            row.v = truncated_martingale(n, ctx.obs, 0, rec, ctx.model,
                                         rec.exit_time + 1.0, incs);
            row.f_a.resize(cfg.a_grid.size());
            for (std::size_t ai = 0; ai < cfg.a_grid.size(); ++ai) {
                row.f_a[ai] =
                    truncated_martingale(n, ctx.obs, 0, rec, ctx.model, cfg.a_grid[ai], incs);
            }
            rows[i] = std::move(row);
        });

        std::vector<std::string> header{"n", "path_index", "h", "method", "seed", "tau", "v"};
        for (double a : cfg.a_grid) header.push_back("f_a" + format_double(a));
        const std::string csv_name = "martingale_horizon_paths_" + n_tag(n) + ".csv";
        CsvWriter csv(ctx.out / csv_name, header);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            csv.field(n).field(static_cast<std::uint64_t>(i)).field(h).field(cfg.detection)
                .field(cfg.master_seed).field(rows[i].tau).field(rows[i].v);
            for (double f : rows[i].f_a) csv.field(f);
            csv.end_row();
        }
        csv.close(ctx.out / csv_name);
        ctx.csv_files.push_back(csv_name);

        std::vector<double> gaps(cfg.a_grid.size(), 0.0), bounds(cfg.a_grid.size(), 0.0);
        for (std::size_t ai = 0; ai < cfg.a_grid.size(); ++ai) {
            std::size_t tail = 0;
            double gap = 0.0;
            for (const Row& row : rows) {
                gap += std::abs(row.f_a[ai] - row.v);
                if (row.tau > cfg.a_grid[ai]) ++tail;
            }
            gaps[ai] = gap / static_cast<double>(rows.size());
            const double tail_prob = static_cast<double>(tail) / static_cast<double>(rows.size());
            bounds[ai] = 2.0 * grad_scale * tail_prob;

            TestReport info = informational(
                "martingale_gap_" + n_tag(n) + "_a" + format_double(cfg.a_grid[ai]), gaps[ai]);
            info.sample_size1 = rows.size();
            add_provenance(info, n, h, cfg);
            info.add_meta("a", format_double(cfg.a_grid[ai]));
            info.add_meta("bound", format_double(bounds[ai]));
            info.add_meta("tail_prob", format_double(tail_prob));
            ctx.reports.push_back(std::move(info));
        }

        TestReport mono = upper_bound_report("martingale_gap_monotone_" + n_tag(n),
                                             max_consecutive_increase(gaps), 0.0,
                                             "max consecutive increase across a_grid <= threshold");
        mono.sample_size1 = rows.size();
        add_provenance(mono, n, h, cfg);
        ctx.reports.push_back(std::move(mono));

        double worst_excess = -std::numeric_limits<double>::infinity();
        for (std::size_t ai = 0; ai < cfg.a_grid.size(); ++ai) {
            worst_excess = std::max(worst_excess, gaps[ai] - bounds[ai]);
        }
        TestReport bound_r = upper_bound_report("martingale_gap_bound_" + n_tag(n), worst_excess,
                                                0.0, "max over a of (gap - 2 scale P(tau > a)) "
                                                     "<= threshold");
        bound_r.sample_size1 = rows.size();
        add_provenance(bound_r, n, h, cfg);
        bound_r.add_meta("grad_scale", format_double(grad_scale));
        ctx.reports.push_back(std::move(bound_r));

        if (n == cfg.n_grid.back()) {
            std::vector<double> signs(rows.size());
            std::vector<double> vs(rows.size());
            double mean_abs = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                vs[i] = rows[i].v;
                signs[i] = rows[i].v < 0.0 ? -1.0 : 1.0;
                mean_abs += std::abs(rows[i].v);
            }
            mean_abs /= static_cast<double>(rows.size());
            const ReferenceSample ref = exact_two_point(cfg.paths, cfg.master_seed);
            std::vector<double> ref_values(ref.count());
            for (std::size_t i = 0; i < ref.count(); ++i) ref_values[i] = ref.values.at(i, 0);

            TestReport sign_ks = ks_two_sample(signs, ref_values, cfg.ks_threshold);
            sign_ks.test_name = "martingale_v_sign_ks";
            add_provenance(sign_ks, n, h, cfg);
            sign_ks.add_meta("mean_abs_v", format_double(mean_abs));
            sign_ks.add_meta("curve", "ks_vs_n");
            ctx.reports.push_back(std::move(sign_ks));

            TestReport levy = upper_bound_report("martingale_v_levy",
                                                 levy_distance_to_two_point(vs),
                                                 cfg.levy_threshold_v);
            levy.sample_size1 = vs.size();
            add_provenance(levy, n, h, cfg);
            levy.add_meta("mean_abs_v", format_double(mean_abs));
            ctx.reports.push_back(std::move(levy));
        }
    }
}

json report_json_object(const TestReport& r) {
    json o;
    o["test_name"] = r.test_name;
    o["rule"] = r.rule;
    o["statistic"] = r.statistic;
    if (r.p_value) o["p_value"] = *r.p_value;
    else o["p_value"] = nullptr;
    o["threshold"] = r.threshold;
    o["pass"] = r.pass;
    o["sample_sizes"] = json::array({r.sample_size1, r.sample_size2});
    json meta = json::object();
    for (const auto& [k, v] : r.metadata) meta[k] = v;
    o["metadata"] = meta;
    return o;
}

}  // namespace

std::string report_to_json(const std::vector<TestReport>& reports) {
    json arr = json::array();
    for (const TestReport& r : reports) arr.push_back(report_json_object(r));
    return arr.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const SdeModel& model = model_by_name(cfg.model);
    const Observable& obs = observable_by_name(cfg.observable);
    fs::create_directories(cfg.out_dir);

    std::vector<TestReport> reports;
    std::vector<std::string> csv_files;
    ExperimentContext ctx{cfg, model, obs, fs::path(cfg.out_dir), reports, csv_files};

    if (cfg.experiment == "example1") run_example1(ctx);
    else if (cfg.experiment == "fdd_grid") run_fdd_grid(ctx);
    else if (cfg.experiment == "exit_time_law") run_exit_time_law(ctx);
    else if (cfg.experiment == "sphere_uniformity") run_sphere_uniformity(ctx);
    else if (cfg.experiment == "non_tightness") run_non_tightness(ctx);
    else if (cfg.experiment == "remainder_ucp") run_remainder_ucp(ctx);
    else if (cfg.experiment == "bias_study") run_bias_study(ctx);
    else if (cfg.experiment == "martingale_horizon") run_martingale_horizon(ctx);
    else throw ConfigError("config error: field 'experiment': unknown experiment");

    const fs::path report_path = ctx.out / "report.json";
    {
        std::ofstream os(report_path);
        if (!os) throw IoError("cannot open report file: " + report_path.string());
        os << report_to_json(reports);
        if (!os) throw IoError("failed writing report file: " + report_path.string());
    }

    RunManifest manifest;
    manifest.version = kVersion;
    manifest.experiment = cfg.experiment;
    manifest.master_seed = cfg.master_seed;
    manifest.out_dir = cfg.out_dir;
    manifest.csv_files = csv_files;
    manifest.report_file = "report.json";
    manifest.all_passed = std::all_of(reports.begin(), reports.end(),
                                      [](const TestReport& r) { return r.pass; });
    manifest.config = config_snapshot(cfg);
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json m;
    m["version"] = manifest.version;
    m["experiment"] = manifest.experiment;
    m["master_seed"] = manifest.master_seed;
    m["out_dir"] = manifest.out_dir;
    m["wall_seconds"] = manifest.wall_seconds;
    m["csv_files"] = manifest.csv_files;
    m["report_file"] = manifest.report_file;
    m["all_passed"] = manifest.all_passed;
    json cfg_json = json::object();
    for (const auto& [k, v] : manifest.config) cfg_json[k] = v;
    m["config"] = cfg_json;
    const fs::path manifest_path = ctx.out / "manifest.json";
    std::ofstream os(manifest_path);
    if (!os) throw IoError("cannot open manifest file: " + manifest_path.string());
    os << m.dump(2) << "\n";
    if (!os) throw IoError("failed writing manifest file: " + manifest_path.string());
    return manifest;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest file: " + path);
    json m = json::parse(is, nullptr, true, true);
    RunManifest manifest;
    manifest.version = m.at("version").get<std::string>();
    manifest.experiment = m.at("experiment").get<std::string>();
    manifest.master_seed = m.at("master_seed").get<std::uint64_t>();
    manifest.out_dir = m.at("out_dir").get<std::string>();
    manifest.wall_seconds = m.at("wall_seconds").get<double>();
    manifest.csv_files = m.at("csv_files").get<std::vector<std::string>>();
    manifest.report_file = m.at("report_file").get<std::string>();
    manifest.all_passed = m.at("all_passed").get<bool>();
    for (const auto& [k, v] : m.at("config").items()) {
        manifest.config.emplace_back(k, v.get<std::string>());
    }
    return manifest;
}

void emit_plot_data(const RunManifest& manifest) {
    const fs::path out(manifest.out_dir);
    const fs::path report_path = out / manifest.report_file;
    if (!fs::exists(report_path)) {
        throw IoError("manifest's report file does not exist: " + report_path.string());
    }
    std::ifstream is(report_path);
    json reports = json::parse(is);

    CsvWriter ks(out / "plot_ks_vs_n.csv",
                 {"experiment", "test_name", "n", "t", "statistic", "p_value"});
    CsvWriter exceed(out / "plot_exceedance_vs_n.csv",
                     {"experiment", "test_name", "n", "statistic"});
    CsvWriter bias(out / "plot_bias_vs_h.csv", {"experiment", "test_name", "h", "statistic"});
    for (const auto& r : reports) {
        const auto& meta = r.at("metadata");
        const std::string curve = meta.contains("curve") ? meta.at("curve").get<std::string>() : "";
        const std::string name = r.at("test_name").get<std::string>();
        if (curve == "ks_vs_n") {
            ks.field(manifest.experiment).field(name)
                .field(meta.contains("n") ? meta.at("n").get<std::string>() : std::string())
                .field(meta.contains("t") ? meta.at("t").get<std::string>() : std::string())
                .field(r.at("statistic").get<double>())
                .field(r.at("p_value").is_null()
                           ? std::string()
                           : format_double(r.at("p_value").get<double>()));
            ks.end_row();
        } else if (curve == "exceedance_vs_n") {
            exceed.field(manifest.experiment).field(name)
                .field(meta.contains("n") ? meta.at("n").get<std::string>() : std::string())
                .field(r.at("statistic").get<double>());
            exceed.end_row();
        } else if (curve == "bias_vs_h") {
            bias.field(manifest.experiment).field(name)
                .field(meta.contains("h") ? meta.at("h").get<std::string>() : std::string())
                .field(r.at("statistic").get<double>());
            bias.end_row();
        }
    }
    ks.close(out / "plot_ks_vs_n.csv");
    exceed.close(out / "plot_exceedance_vs_n.csv");
    bias.close(out / "plot_bias_vs_h.csv");
}

}  // namespace exitlab
