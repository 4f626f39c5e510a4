#include "exitlab/engine.hpp"

#include <cmath>
#include <sstream>

#include "exitlab/errors.hpp"

namespace exitlab {

namespace {

// Shared stepping core so the public op and the simulation loops use the exact
// same arithmetic: out = y + mu dt, then out += sigma dW row by row.
inline void euler_step_into(std::span<const double> y, std::span<const double> mu,
                            const Matrix& sigma, double dt, std::span<const double> dW,
                            std::span<double> out) {
    const std::size_t d = y.size();
    for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + mu[i] * dt;
    for (std::size_t i = 0; i < d; ++i) {
        double acc = out[i];
        for (std::size_t j = 0; j < d; ++j) acc += sigma.at(i, j) * dW[j];
        out[i] = acc;
    }
}

[[noreturn]] void throw_nonfinite(std::span<const double> state) {
    std::ostringstream os;
    os << "euler step produced a non-finite state: (";
    for (std::size_t i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state[i];
    os << ")";
    throw NumericError(os.str());
}

inline void check_finite(std::span<const double> state) {
    for (double v : state) {
        if (!std::isfinite(v)) throw_nonfinite(state);
    }
}

}  // namespace

std::vector<double> euler_step(const SdeModel& model, std::span<const double> state,
                               double dt, std::span<const double> dW) {
    if (state.size() != model.dim || dW.size() != model.dim) {
        throw DomainError("euler_step: dimension mismatch");
    }
    if (dt < 0.0) throw DomainError("euler_step: dt must be >= 0");
    std::vector<double> mu(model.dim);
    model.drift(state, mu);
    Matrix sigma(model.dim, model.dim);
    model.diffusion(state, sigma);
    std::vector<double> out(model.dim);
    euler_step_into(state, mu, sigma, dt, dW, out);
    check_finite(out);
    return out;
}

PathGrid simulate_on_grid(const SdeModel& model, double horizon, double step,
                          const StreamKey& key) {
    if (step <= 0.0 || horizon <= 0.0) throw DomainError("simulate_on_grid: step and horizon must be > 0");
    if (step > horizon) throw DomainError("simulate_on_grid: step must not exceed horizon");
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(horizon / step - 1e-12));
    const std::size_t d = model.dim;
    const double sqrt_h = std::sqrt(step);

    PathGrid path;
    path.dim = d;
    path.reserve(n_steps + 1);
    path.append(0.0, model.initial);

    GaussianStream stream({key.master_seed, key.path_index, kMainSubstream});
    std::vector<double> y(model.initial.begin(), model.initial.end());
    std::vector<double> y_next(d), mu(d), dW(d);
    Matrix sigma(d, d);
    if (model.constant_diffusion) model.diffusion(y, sigma);
    for (std::size_t j = 0; j < n_steps; ++j) {
        for (std::size_t i = 0; i < d; ++i) dW[i] = sqrt_h * stream.next();
        model.drift(y, mu);
        if (!model.constant_diffusion) model.diffusion(y, sigma);
        euler_step_into(y, mu, sigma, step, dW, y_next);
        check_finite(y_next);
        y.swap(y_next);
        path.append(static_cast<double>(j + 1) * step, y);
    }
    return path;
}

ExitRecord simulate_until_exit(const SdeModel& model, std::span<const double> center,
                               double radius, double step, const StreamKey& key,
                               const ExitSimOptions& options) {
    if (radius <= 0.0) throw DomainError("simulate_until_exit: radius must be > 0");
    if (step <= 0.0) throw DomainError("simulate_until_exit: step must be > 0");
    const double max_time = options.max_time > 0.0 ? options.max_time : default_max_time(radius);
    const std::size_t d = model.dim;
    const double sqrt_h = std::sqrt(step);

    ExitScanner scanner(model, center, radius, options.method, key);
    if (!scanner.inside(model.initial)) {
        throw DomainError("simulate_until_exit: initial state must lie inside the open ball");
    }

    ExitRecord rec;
    rec.radius = radius;
    rec.method = options.method;
    rec.pre_exit_grid.dim = d;
    if (options.keep_grid) rec.pre_exit_grid.append(0.0, model.initial);
    if (options.increments_out) options.increments_out->clear();
    if (options.raw_grid_out) {
        options.raw_grid_out->dim = d;
        options.raw_grid_out->times.clear();
        options.raw_grid_out->states.clear();
        options.raw_grid_out->append(0.0, model.initial);
    }

    GaussianStream stream({key.master_seed, key.path_index, kMainSubstream});
    std::vector<double> y(model.initial.begin(), model.initial.end());
    std::vector<double> y_next(d), mu(d), dW(d);
    Matrix sigma(d, d);
    if (model.constant_diffusion) model.diffusion(y, sigma);

    const std::size_t max_steps = static_cast<std::size_t>(std::floor(max_time / step + 1e-9));
    for (std::size_t j = 0; j < max_steps; ++j) {
        for (std::size_t i = 0; i < d; ++i) dW[i] = sqrt_h * stream.next();
        model.drift(y, mu);
        if (!model.constant_diffusion) model.diffusion(y, sigma);
        euler_step_into(y, mu, sigma, step, dW, y_next);
        check_finite(y_next);
        if (options.increments_out) {
            options.increments_out->insert(options.increments_out->end(), dW.begin(), dW.end());
        }
        const double t0 = static_cast<double>(j) * step;
        const double t1 = static_cast<double>(j + 1) * step;
        if (options.raw_grid_out) options.raw_grid_out->append(t1, y_next);
        auto event = scanner.feed(j, t0, y, t1, y_next);
        if (event) {
            rec.exit_time = event->time;
            rec.exit_state = std::move(event->state);
            if (!options.keep_grid) {
                rec.pre_exit_grid.append(0.0, model.initial);
            }
            rec.pre_exit_grid.append(rec.exit_time, rec.exit_state);
            return rec;
        }
        y.swap(y_next);
        if (options.keep_grid) rec.pre_exit_grid.append(t1, y);
    }
    throw TimeoutError("simulate_until_exit: no exit before max_time (degenerate model or too "
                       "small max_time/step)");
}

std::span<const double> stopped_state_at(const ExitRecord& record, double t) {
    if (t >= record.exit_time) {
        return {record.exit_state.data(), record.exit_state.size()};
    }
    return state_at(record.pre_exit_grid, t);
}

}  // namespace exitlab
