#include "exitlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exitlab/errors.hpp"

namespace exitlab {

double ks_statistic(std::span<const double> s1, std::span<const double> s2) {
    if (s1.empty() || s2.empty()) throw DomainError("ks_two_sample: samples must be non-empty");
    std::vector<double> a(s1.begin(), s1.end());
    std::vector<double> b(s2.begin(), s2.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        const double gap = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
        if (gap > d) d = gap;
    }
    return d;
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 101; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    const double p = 2.0 * sum;
    return std::min(1.0, std::max(0.0, p));
}

TestReport ks_two_sample(std::span<const double> s1, std::span<const double> s2,
                         double threshold) {
    const double d = ks_statistic(s1, s2);
    const double na = static_cast<double>(s1.size());
    const double nb = static_cast<double>(s2.size());
    const double ne = na * nb / (na + nb);
    const double sqrt_ne = std::sqrt(ne);
    const double lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;

    TestReport r;
    r.test_name = "ks_two_sample";
    r.rule = "p_value > threshold";
    r.statistic = d;
    r.p_value = kolmogorov_sf(lambda);
    r.threshold = threshold;
    r.pass = *r.p_value > threshold;
    r.sample_size1 = s1.size();
    r.sample_size2 = s2.size();
    return r;
}

namespace {

// Regularized incomplete gamma Q(a, x) by series / continued fraction.
double igamc(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("igamc: invalid arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) series, return 1 - P
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - lg);
        return std::min(1.0, std::max(0.0, 1.0 - p));
    }
    // Q(a,x) continued fraction (modified Lentz)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int n = 1; n <= 500; ++n) {
        const double an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return std::min(1.0, std::max(0.0, q));
}

}  // namespace

double chi2_sf(double statistic, double dof) {
    return igamc(0.5 * dof, 0.5 * statistic);
}

TestReport chi2_sphere_uniformity(const Matrix& values, std::size_t bins, double threshold) {
    if (values.cols != 2) {
        throw DomainError("chi2_sphere_uniformity: implemented for d = 2 only");
    }
    if (bins < 2) throw DomainError("chi2_sphere_uniformity: bins must be >= 2");
    if (values.rows < 5 * bins) {
        throw DomainError("chi2_sphere_uniformity: sample size must be >= 5 * bins");
    }
    std::vector<std::size_t> counts(bins, 0);
    for (std::size_t i = 0; i < values.rows; ++i) {
        const double x = values.at(i, 0);
        const double y = values.at(i, 1);
        const double nrm = std::sqrt(x * x + y * y);
        if (std::abs(nrm - 1.0) > 1e-6) {
            throw DomainError("chi2_sphere_uniformity: values must have unit norm");
        }
        const double angle = std::atan2(y, x);  // (-pi, pi]
        double frac = (angle + std::numbers::pi) / (2.0 * std::numbers::pi);
        if (frac >= 1.0) frac = 0.0;
        std::size_t bin = static_cast<std::size_t>(frac * static_cast<double>(bins));
        if (bin >= bins) bin = bins - 1;
        counts[bin]++;
    }
    const double expected = static_cast<double>(values.rows) / static_cast<double>(bins);
    double stat = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double diff = static_cast<double>(counts[b]) - expected;
        stat += diff * diff / expected;
    }
    TestReport r;
    r.test_name = "chi2_sphere_uniformity";
    r.rule = "p_value > threshold";
    r.statistic = stat;
    r.p_value = chi2_sf(stat, static_cast<double>(bins - 1));
    r.threshold = threshold;
    r.pass = *r.p_value > threshold;
    r.sample_size1 = values.rows;
    r.add_meta("bins", std::to_string(bins));
    return r;
}

TestReport tightness_diagnostic(std::span<const double> suprema, double epsilon,
                                double threshold, bool expect_exceed) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("tightness_diagnostic: epsilon must lie in (0, 1)");
    }
    std::size_t n_exceed = 0;
    for (double s : suprema) {
        if (s >= epsilon) ++n_exceed;
    }
    const double fraction =
        suprema.empty() ? 0.0 : static_cast<double>(n_exceed) / static_cast<double>(suprema.size());
    TestReport r;
    r.test_name = "tightness_diagnostic";
    r.rule = expect_exceed ? "statistic >= threshold" : "statistic <= threshold";
    r.statistic = fraction;
    r.threshold = threshold;
    r.pass = expect_exceed ? fraction >= threshold : fraction <= threshold;
    r.sample_size1 = suprema.size();
    r.add_meta("epsilon", std::to_string(epsilon));
    return r;
}

std::pair<double, double> mean_with_ci(std::span<const double> values, double confidence) {
    if (values.size() < 2) throw DomainError("mean_with_ci: need at least two values");
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw DomainError("mean_with_ci: confidence must lie in (0, 1)");
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    const double z = normal_quantile(0.5 * (1.0 + confidence));
    return {mean, z * std::sqrt(var / n)};
}

double levy_distance_to_two_point(std::span<const double> sample, double atom_minus,
                                  double atom_plus) {
    if (sample.empty()) throw DomainError("levy_distance: sample must be non-empty");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    auto cdf = [&](double x) {
        return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) / n;
    };
    auto cdf_left = [&](double x) {
        return static_cast<double>(std::lower_bound(s.begin(), s.end(), x) - s.begin()) / n;
    };
    // Two-point G with equal masses: the corridor conditions reduce to four
    // inequalities at the (shifted) atoms.
    auto ok = [&](double eps) {
        return cdf(atom_minus + eps) >= 0.5 - eps && cdf(atom_plus + eps) >= 1.0 - eps &&
               cdf_left(atom_minus - eps) <= eps && cdf_left(atom_plus - eps) <= 0.5 + eps;
    };
    double lo = 0.0;
    double hi = 1.0 + std::max(std::abs(s.front() - atom_minus), std::abs(s.back() - atom_plus));
    if (ok(0.0)) return 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    // Acklam's rational approximation, |relative error| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double q, r, x;
    if (p < p_low) {
        q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        q = p - 0.5;
        r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    return x;
}

}  // namespace exitlab
