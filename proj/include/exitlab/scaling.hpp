#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exitlab/engine.hpp"
#include "exitlab/linalg.hpp"
#include "exitlab/model.hpp"

namespace exitlab {

// Per-path evaluation of the scaled stopped observable
// Y^n_t = sqrt(n) (f(X_{tau and t}) - f(x)) on a time grid.
struct ScaledFddSample {
    std::uint64_t n = 1;
    std::vector<double> times;       // m entries
    Matrix values;                   // m x l
    std::vector<double> exit_value;  // l entries, Y^n at the exit time
    double exit_time_scaled = 0.0;   // n * exit_time, exact product
};

// sup over the stopped path of || sqrt(n) [ (f(X)-f(x)) - J_f(x)(X-x) ] ||.
struct RemainderSample {
    std::uint64_t n = 1;
    double sup_norm = 0.0;
    double horizon = 0.0;
};

// Requires the record's radius to equal 1/sqrt(n); times must be sorted and
// non-negative. Path values between grid points resolve to the previous grid
// point; values at t >= exit_time are frozen at the exit state.
ScaledFddSample scaled_stopped_values(std::uint64_t n, const Observable& observable,
                                      const ExitRecord& exit, const SdeModel& model,
                                      std::span<const double> times);

// Grid times multiplied by n, states mapped y -> sqrt(n) (y - x).
PathGrid time_scaled_path(std::uint64_t n, const PathGrid& path, std::span<const double> x);

RemainderSample remainder_sup(std::uint64_t n, const Observable& observable,
                              const ExitRecord& exit, const SdeModel& model, double horizon);

// Discrete stochastic-integral value
// sqrt(n) * sum_{grid s < tau and a} grad f_k(X_s) . sigma(X_s) dW_s,
// with `increments` the path's driving dW sequence (flattened, one d-block per
// step, the crossing step included). Constant in a for a >= exit_time.
double truncated_martingale(std::uint64_t n, const Observable& observable,
                            std::size_t component, const ExitRecord& exit,
                            const SdeModel& model, double horizon_a,
                            std::span<const double> increments);

// sup_{t <= delta} || Y^n_t || over the stopped path (grid points up to delta,
// exit point included once the path has exited by delta).
double scaled_sup_norm(std::uint64_t n, const Observable& observable, const ExitRecord& exit,
                       const SdeModel& model, double delta);

}  // namespace exitlab
