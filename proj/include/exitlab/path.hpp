#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace exitlab {

// Discrete sample path: strictly increasing times starting at 0 and one R^d
// state per time, flattened row-major.
struct PathGrid {
    std::size_t dim = 1;
    std::vector<double> times;
    std::vector<double> states;  // size() == dim * times.size()

    std::size_t size() const { return times.size(); }

    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * dim, dim};
    }

    void append(double t, std::span<const double> y) {
        times.push_back(t);
        states.insert(states.end(), y.begin(), y.end());
    }

    void reserve(std::size_t n) {
        times.reserve(n);
        states.reserve(n * dim);
    }
};

// State at time t under previous-grid-point lookup (the path is a step
// function, constant on [t_i, t_{i+1})). t before the first grid time returns
// the first state.
std::span<const double> state_at(const PathGrid& path, double t);

}  // namespace exitlab
