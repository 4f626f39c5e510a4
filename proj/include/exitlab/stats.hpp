#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exitlab/linalg.hpp"

namespace exitlab {

// One statistical verdict with full provenance; serializes to a JSON object
// with stable field names.
struct TestReport {
    std::string test_name;
    std::string rule;  // the declared decision on (statistic, p_value, threshold)
    double statistic = 0.0;
    std::optional<double> p_value;
    double threshold = 0.0;
    bool pass = false;
    std::size_t sample_size1 = 0;
    std::size_t sample_size2 = 0;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_meta(std::string key, std::string value) {
        metadata.emplace_back(std::move(key), std::move(value));
    }
};

// sup distance between the two empirical CDFs.
double ks_statistic(std::span<const double> s1, std::span<const double> s2);

// Asymptotic two-sample Kolmogorov-Smirnov test; decision rule
// p_value > threshold. Empty samples -> DomainError.
TestReport ks_two_sample(std::span<const double> s1, std::span<const double> s2,
                         double threshold = 0.01);

// chi^2 over equal angular bins for unit vectors in the plane (d = 2 only);
// decision rule p_value > threshold. Preconditions per the bin count and
// sample size; non-unit vectors -> DomainError.
TestReport chi2_sphere_uniformity(const Matrix& values, std::size_t bins,
                                  double threshold = 0.01);

// Exceedance fraction of per-path suprema over epsilon. expect_exceed = true:
// pass when fraction >= threshold; false (control): pass when <= threshold.
TestReport tightness_diagnostic(std::span<const double> suprema, double epsilon,
                                double threshold, bool expect_exceed);

// Sample mean and normal-approximation confidence half-width. Requires at
// least two values.
std::pair<double, double> mean_with_ci(std::span<const double> values, double confidence);

// Levy distance between the empirical law of `sample` and the two-point law
// with equal mass at atom_minus and atom_plus. Metrizes weak convergence, so
// it tolerates the O(n^-1/2) atom offsets a sup-CDF distance cannot.
double levy_distance_to_two_point(std::span<const double> sample, double atom_minus = -1.0,
                                  double atom_plus = 1.0);

// Distribution helpers.
double kolmogorov_sf(double lambda);          // Q_KS
double chi2_sf(double statistic, double dof); // upper tail of chi^2(dof)
double normal_quantile(double p);             // inverse standard normal CDF

}  // namespace exitlab
