#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exitlab/model.hpp"
#include "exitlab/path.hpp"
#include "exitlab/rng.hpp"

namespace exitlab {

enum class DetectionMethod {
    naive,            // first grid point outside; exit state projected to the sphere
    bridge_corrected, // d=1 only: latent interior crossings via the bridge formula
    substepped,       // any d: pinned bridge fill-in of near-boundary intervals
};

const char* method_name(DetectionMethod m);
DetectionMethod method_from_name(const std::string& name);

// One simulated path's first exit from the ball of `radius` around a center.
struct ExitRecord {
    double exit_time = 0.0;
    std::vector<double> exit_state;  // on the sphere up to 1e-9 * radius
    PathGrid pre_exit_grid;          // interior points, then (exit_time, exit_state)
    double radius = 0.0;
    DetectionMethod method = DetectionMethod::naive;
};

// Probability that a Brownian bridge from a to b over dt (volatility
// diffusion_scale) touches `level`, for a <= level and b <= level:
// exp(-2 (level-a)(level-b) / (diffusion_scale^2 dt)).
double bridge_crossing_probability(double a, double b, double level, double dt,
                                   double diffusion_scale);

struct CrossingEvent {
    double time;
    std::vector<double> state;
};

// Streaming crossing detector over consecutive path intervals. Used both by
// simulate_until_exit and by post-hoc detect_exit, so the two agree bit for
// bit on the same inputs.
class ExitScanner {
  public:
    ExitScanner(const SdeModel& model, std::span<const double> center, double radius,
                DetectionMethod method, const StreamKey& path_key);

    // Inspects the interval [t0, t1]; y1 may lie outside the ball. step_index
    // keys the auxiliary streams (bridge coins, fill-in draws).
    std::optional<CrossingEvent> feed(std::size_t step_index, double t0,
                                      std::span<const double> y0, double t1,
                                      std::span<const double> y1);

    bool inside(std::span<const double> y) const;  // strictly inside the open ball

  private:
    std::optional<CrossingEvent> refine(std::size_t step_index, double t0,
                                        std::span<const double> y0, double t1,
                                        std::span<const double> y1);
    std::vector<double> project(std::span<const double> y) const;

    const SdeModel* model_;
    std::vector<double> center_;
    double radius_;
    DetectionMethod method_;
    StreamKey key_;
    Matrix sigma_;
    std::vector<double> walk_;  // fill-in scratch
};

// Scans a complete path. Returns std::nullopt when the path never leaves the
// ball. Throws DomainError if the path starts outside the open ball, or for
// bridge_corrected in d >= 2.
std::optional<ExitRecord> detect_exit(const PathGrid& path, std::span<const double> center,
                                      double radius, DetectionMethod method,
                                      const StreamKey& key, const SdeModel& model);

}  // namespace exitlab
