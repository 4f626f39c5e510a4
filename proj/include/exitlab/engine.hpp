#pragma once

#include <span>
#include <vector>

#include "exitlab/exit.hpp"
#include "exitlab/model.hpp"
#include "exitlab/path.hpp"
#include "exitlab/rng.hpp"

namespace exitlab {

// One explicit Euler increment: state + mu(state) dt + sigma(state) dW.
// dW is the Brownian increment (variance dt per coordinate when used for
// timestepping). Throws DomainError on dimension mismatch, NumericError if the
// result is non-finite.
std::vector<double> euler_step(const SdeModel& model, std::span<const double> state,
                               double dt, std::span<const double> dW);

// Euler path on the uniform grid {0, h, 2h, ...} covering [0, horizon];
// increments drawn from the key's main substream, variance h per coordinate.
PathGrid simulate_on_grid(const SdeModel& model, double horizon, double step,
                          const StreamKey& key);

struct ExitSimOptions {
    DetectionMethod method = DetectionMethod::naive;
    double max_time = 0.0;  // <= 0: default 1e4 * radius^2
    bool keep_grid = true;  // false: pre_exit_grid holds only start and exit
    std::vector<double>* increments_out = nullptr;  // driving dW per step, flattened
    PathGrid* raw_grid_out = nullptr;  // every stepped state, crossing state unprojected
};

// Steps until the path leaves the ball of `radius` around `center`, refining
// the crossing with the configured detection method. Termination within
// max_time is the caller's obligation (the diffusivity probe guarantees it);
// degenerate models surface as TimeoutError.
ExitRecord simulate_until_exit(const SdeModel& model, std::span<const double> center,
                               double radius, double step, const StreamKey& key,
                               const ExitSimOptions& options = {});

// Stopped-path value at time t: exit_state for t >= exit_time, previous grid
// point otherwise.
std::span<const double> stopped_state_at(const ExitRecord& record, double t);

inline double default_max_time(double radius) { return 1e4 * radius * radius; }

// Radius of the n-th shrinking ball, 1/sqrt(n); the single definition used by
// engine, scaling checks and the runner.
inline double radius_for_scale(std::uint64_t n) {
    return 1.0 / std::sqrt(static_cast<double>(n));
}

}  // namespace exitlab
