#include "exitlab/exit.hpp"

#include <cmath>

#include "exitlab/errors.hpp"

namespace exitlab {

namespace {
constexpr int kFillinSteps = 100;        // interval re-integrated at dt/100
constexpr double kLogProbFloor = -40.0;  // skip events with probability < e^-40
}  // namespace

const char* method_name(DetectionMethod m) {
    switch (m) {
        case DetectionMethod::naive: return "naive";
        case DetectionMethod::bridge_corrected: return "bridge_corrected";
        case DetectionMethod::substepped: return "substepped";
    }
    return "unknown";
}

DetectionMethod method_from_name(const std::string& name) {
    if (name == "naive") return DetectionMethod::naive;
    if (name == "bridge_corrected") return DetectionMethod::bridge_corrected;
    if (name == "substepped") return DetectionMethod::substepped;
    throw ConfigError("config error: field 'detection': unknown method '" + name + "'");
}

double bridge_crossing_probability(double a, double b, double level, double dt,
                                   double diffusion_scale) {
    if (dt <= 0.0) throw DomainError("bridge_crossing_probability: dt must be > 0");
    if (diffusion_scale <= 0.0) {
        throw DomainError("bridge_crossing_probability: diffusion_scale must be > 0");
    }
    if (a > level || b > level) {
        throw DomainError("bridge_crossing_probability: endpoints must not exceed the level");
    }
    const double var = diffusion_scale * diffusion_scale * dt;
    return std::exp(-2.0 * (level - a) * (level - b) / var);
}

ExitScanner::ExitScanner(const SdeModel& model, std::span<const double> center, double radius,
                         DetectionMethod method, const StreamKey& path_key)
    : model_(&model),
      center_(center.begin(), center.end()),
      radius_(radius),
      method_(method),
      key_(path_key),
      sigma_(model.dim, model.dim) {
    if (radius <= 0.0) throw DomainError("exit detection: radius must be > 0");
    if (center.size() != model.dim) throw DomainError("exit detection: center dimension mismatch");
    if (method == DetectionMethod::bridge_corrected && model.dim != 1) {
        throw ConfigError(
            "config error: field 'detection': bridge_corrected requires a 1-d model; "
            "use substepped for d >= 2");
    }
}

bool ExitScanner::inside(std::span<const double> y) const {
    if (model_->dim == 1) return std::abs(y[0] - center_[0]) < radius_;
    return squared_distance(y, center_) < radius_ * radius_;
}

std::vector<double> ExitScanner::project(std::span<const double> y) const {
    const std::size_t d = center_.size();
    std::vector<double> out(d);
    const double dist = std::sqrt(squared_distance(y, center_));
    const double scale = radius_ / dist;
    for (std::size_t i = 0; i < d; ++i) out[i] = center_[i] + scale * (y[i] - center_[i]);
    return out;
}

std::optional<CrossingEvent> ExitScanner::feed(std::size_t step_index, double t0,
                                               std::span<const double> y0, double t1,
                                               std::span<const double> y1) {
    const bool crossed = !inside(y1);
    switch (method_) {
        case DetectionMethod::naive: {
            if (!crossed) return std::nullopt;
            return CrossingEvent{t1, project(y1)};
        }
        case DetectionMethod::bridge_corrected: {
            if (crossed) return CrossingEvent{t1, project(y1)};
            const double dt = t1 - t0;
            const double u0 = y0[0] - center_[0];
            const double u1 = y1[0] - center_[0];
            model_->diffusion(y0, sigma_);
            const double scale = std::abs(sigma_.at(0, 0));
            if (scale <= 0.0) return std::nullopt;  // frozen volatility zero: no latent crossing
            const double var = scale * scale * dt;
            const double e_up = -2.0 * (radius_ - u0) * (radius_ - u1) / var;
            const double e_dn = -2.0 * (radius_ + u0) * (radius_ + u1) / var;
            if (e_up < kLogProbFloor && e_dn < kLogProbFloor) return std::nullopt;
            const double p_up = bridge_crossing_probability(u0, u1, radius_, dt, scale);
            const double p_dn = bridge_crossing_probability(-u0, -u1, radius_, dt, scale);
            const double q = p_up + p_dn - p_up * p_dn;
            StreamKey coin_key = key_;
            coin_key.substream = kDetectorSubstream;
            const UniformPair u = uniform_pair_at(coin_key, static_cast<std::uint32_t>(step_index));
            if (u.first > q) return std::nullopt;
            const bool upper = u.second * (p_up + p_dn) < p_up;
            std::vector<double> state{center_[0] + (upper ? radius_ : -radius_)};
            return CrossingEvent{0.5 * (t0 + t1), std::move(state)};
        }
        case DetectionMethod::substepped: {
            if (crossed) return refine(step_index, t0, y0, t1, y1);
            // shell test: refine only when an endpoint is within 3 sigma sqrt(dt)
            // of the boundary (interior crossings beyond that have probability
            // < e^-18 and are ignored)
            const double dt = t1 - t0;
            const double shell = radius_ - 3.0 * model_->probe.sigma_max * std::sqrt(dt);
            if (shell > 0.0) {
                const bool near0 = model_->dim == 1
                                       ? std::abs(y0[0] - center_[0]) > shell
                                       : squared_distance(y0, center_) > shell * shell;
                const bool near1 = model_->dim == 1
                                       ? std::abs(y1[0] - center_[0]) > shell
                                       : squared_distance(y1, center_) > shell * shell;
                if (!near0 && !near1) return std::nullopt;
            }
            return refine(step_index, t0, y0, t1, y1);
        }
    }
    return std::nullopt;
}

// Pinned Gaussian-bridge fill-in at dt/100 with volatility frozen at y0. The
// fill-in interpolates the coarse endpoints (the last fill-in point is y1
// itself), so it only detects interior crossings and never alters the path.
std::optional<CrossingEvent> ExitScanner::refine(std::size_t step_index, double t0,
                                                 std::span<const double> y0, double t1,
                                                 std::span<const double> y1) {
    const std::size_t d = model_->dim;
    const double dt = t1 - t0;
    const double delta = dt / kFillinSteps;

    StreamKey fill_key = key_;
    fill_key.substream = kRefineSubstreamBase + static_cast<std::uint32_t>(step_index);
    const auto incs = gaussian_increments(fill_key, kFillinSteps * d, delta);

    walk_.assign(kFillinSteps * d, 0.0);
    std::vector<double> w(d, 0.0);
    for (int k = 0; k < kFillinSteps; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            w[i] += incs[k * d + i];
            walk_[k * d + i] = w[i];
        }
    }
    model_->diffusion(y0, sigma_);

    std::vector<double> prev(y0.begin(), y0.end());
    std::vector<double> point(d), bridge(d);
    for (int k = 1; k <= kFillinSteps; ++k) {
        if (k == kFillinSteps) {
            point.assign(y1.begin(), y1.end());
        } else {
            const double frac = static_cast<double>(k) / kFillinSteps;
            for (std::size_t i = 0; i < d; ++i) {
                bridge[i] = walk_[(k - 1) * d + i] - frac * walk_[(kFillinSteps - 1) * d + i];
            }
            for (std::size_t i = 0; i < d; ++i) {
                double diffuse = 0.0;
                for (std::size_t j = 0; j < d; ++j) diffuse += sigma_.at(i, j) * bridge[j];
                point[i] = y0[i] + frac * (y1[i] - y0[i]) + diffuse;
            }
        }
        if (!inside(point)) {
            // segment-sphere intersection between prev (inside) and point
            double a = 0.0, b = 0.0, c = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double dp = point[i] - prev[i];
                const double pv = prev[i] - center_[i];
                a += dp * dp;
                b += 2.0 * pv * dp;
                c += pv * pv;
            }
            c -= radius_ * radius_;
            double theta = 1.0;
            if (a > 0.0) {
                const double disc = b * b - 4.0 * a * c;
                if (disc >= 0.0) theta = (-b + std::sqrt(disc)) / (2.0 * a);
                theta = std::min(1.0, std::max(0.0, theta));
            }
            std::vector<double> hit(d);
            for (std::size_t i = 0; i < d; ++i) hit[i] = prev[i] + theta * (point[i] - prev[i]);
            const double time = t0 + (static_cast<double>(k - 1) + theta) * delta;
            return CrossingEvent{time, project(hit)};
        }
        prev = point;
    }
    return std::nullopt;
}

std::optional<ExitRecord> detect_exit(const PathGrid& path, std::span<const double> center,
                                      double radius, DetectionMethod method,
                                      const StreamKey& key, const SdeModel& model) {
    if (path.size() == 0) throw DomainError("detect_exit: empty path");
    ExitScanner scanner(model, center, radius, method, key);
    if (!scanner.inside(path.state(0))) {
        throw DomainError("detect_exit: path must start inside the open ball");
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto event = scanner.feed(i, path.times[i], path.state(i), path.times[i + 1],
                                  path.state(i + 1));
        if (event) {
            ExitRecord rec;
            rec.exit_time = event->time;
            rec.exit_state = event->state;
            rec.radius = radius;
            rec.method = method;
            rec.pre_exit_grid.dim = path.dim;
            rec.pre_exit_grid.reserve(i + 2);
            for (std::size_t j = 0; j <= i; ++j) rec.pre_exit_grid.append(path.times[j], path.state(j));
            rec.pre_exit_grid.append(rec.exit_time, rec.exit_state);
            return rec;
        }
    }
    return std::nullopt;
}

}  // namespace exitlab
