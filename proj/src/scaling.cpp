#include "exitlab/scaling.hpp"

#include <cmath>

#include "exitlab/errors.hpp"

namespace exitlab {

namespace {

void check_radius(std::uint64_t n, const ExitRecord& exit) {
    const double expected = radius_for_scale(n);
    if (std::abs(exit.radius - expected) > 1e-12 * expected) {
        throw ConfigError("config error: field 'n_grid': exit record radius " +
                          std::to_string(exit.radius) + " does not match 1/sqrt(n) for n=" +
                          std::to_string(n));
    }
}

void check_times(std::span<const double> times) {
    double prev = -1.0;
    for (double t : times) {
        if (t < 0.0) throw DomainError("scaled_stopped_values: times must be non-negative");
        if (t < prev) throw DomainError("scaled_stopped_values: times must be sorted");
        prev = t;
    }
}

}  // namespace

ScaledFddSample scaled_stopped_values(std::uint64_t n, const Observable& observable,
                                      const ExitRecord& exit, const SdeModel& model,
                                      std::span<const double> times) {
    check_radius(n, exit);
    check_times(times);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const std::size_t l = observable.out_dim;

    std::vector<double> fx(l), fy(l);
    observable.eval(model.initial, fx);

    ScaledFddSample out;
    out.n = n;
    out.times.assign(times.begin(), times.end());
    out.values = Matrix(times.size(), l);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto y = stopped_state_at(exit, times[j]);
        observable.eval(y, fy);
        for (std::size_t k = 0; k < l; ++k) out.values.at(j, k) = sqrt_n * (fy[k] - fx[k]);
    }
    observable.eval(exit.exit_state, fy);
    out.exit_value.resize(l);
    for (std::size_t k = 0; k < l; ++k) out.exit_value[k] = sqrt_n * (fy[k] - fx[k]);
    out.exit_time_scaled = static_cast<double>(n) * exit.exit_time;
    return out;
}

PathGrid time_scaled_path(std::uint64_t n, const PathGrid& path, std::span<const double> x) {
    if (path.dim != x.size()) throw DomainError("time_scaled_path: dimension mismatch");
    const double nd = static_cast<double>(n);
    const double sqrt_n = std::sqrt(nd);
    PathGrid out;
    out.dim = path.dim;
    out.times.resize(path.size());
    out.states.resize(path.states.size());
    for (std::size_t i = 0; i < path.size(); ++i) out.times[i] = nd * path.times[i];
    for (std::size_t i = 0; i < path.size(); ++i) {
        for (std::size_t k = 0; k < path.dim; ++k) {
            out.states[i * path.dim + k] = sqrt_n * (path.states[i * path.dim + k] - x[k]);
        }
    }
    return out;
}

RemainderSample remainder_sup(std::uint64_t n, const Observable& observable,
                              const ExitRecord& exit, const SdeModel& model, double horizon) {
    check_radius(n, exit);
    if (horizon < 0.0) throw DomainError("remainder_sup: horizon must be >= 0");
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const std::size_t l = observable.out_dim;
    const std::size_t d = model.dim;

    std::vector<double> fx(l), fy(l), jdy(l);
    observable.eval(model.initial, fx);
    const Matrix j_at_x = observable.jacobian(model.initial);

    double sup = 0.0;
    const PathGrid& grid = exit.pre_exit_grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.times[i] > horizon) break;
        const auto y = grid.state(i);
        observable.eval(y, fy);
        double norm2 = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            double lin = 0.0;
            for (std::size_t m = 0; m < d; ++m) lin += j_at_x.at(k, m) * (y[m] - model.initial[m]);
            const double r = sqrt_n * ((fy[k] - fx[k]) - lin);
            norm2 += r * r;
        }
        const double nrm = std::sqrt(norm2);
        if (nrm > sup) sup = nrm;
    }
    return RemainderSample{n, sup, horizon};
}

double truncated_martingale(std::uint64_t n, const Observable& observable,
                            std::size_t component, const ExitRecord& exit,
                            const SdeModel& model, double horizon_a,
                            std::span<const double> increments) {
    check_radius(n, exit);
    if (component >= observable.out_dim) {
        throw DomainError("truncated_martingale: component out of range");
    }
    if (horizon_a < 0.0) throw DomainError("truncated_martingale: horizon must be >= 0");
    const std::size_t d = model.dim;
    const PathGrid& grid = exit.pre_exit_grid;
    if (grid.size() < 2) throw ConfigError("truncated_martingale: record lacks its path grid");
    const std::size_t n_steps = grid.size() - 1;  // grid entries before the exit point
    if (increments.size() != n_steps * d) {
        throw ConfigError("truncated_martingale: increments do not match the path grid");
    }

    const double cutoff = std::min(exit.exit_time, horizon_a);
    Matrix sigma(d, d);
    std::vector<double> sdw(d);
    double sum = 0.0;
    for (std::size_t s = 0; s < n_steps; ++s) {
        if (!(grid.times[s] < cutoff)) break;
        const auto y = grid.state(s);
        const Matrix jac = observable.jacobian(y);
        model.diffusion(y, sigma);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += sigma.at(i, j) * increments[s * d + j];
            sdw[i] = acc;
        }
        for (std::size_t i = 0; i < d; ++i) sum += jac.at(component, i) * sdw[i];
    }
    return std::sqrt(static_cast<double>(n)) * sum;
}

double scaled_sup_norm(std::uint64_t n, const Observable& observable, const ExitRecord& exit,
                       const SdeModel& model, double delta) {
    check_radius(n, exit);
    if (delta < 0.0) throw DomainError("scaled_sup_norm: delta must be >= 0");
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const std::size_t l = observable.out_dim;
    std::vector<double> fx(l), fy(l);
    observable.eval(model.initial, fx);

    double sup = 0.0;
    const PathGrid& grid = exit.pre_exit_grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.times[i] > delta) break;
        observable.eval(grid.state(i), fy);
        double norm2 = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            const double v = sqrt_n * (fy[k] - fx[k]);
            norm2 += v * v;
        }
        const double nrm = std::sqrt(norm2);
        if (nrm > sup) sup = nrm;
    }
    return sup;
}

}  // namespace exitlab
