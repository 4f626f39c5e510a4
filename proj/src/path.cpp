#include "exitlab/path.hpp"

#include <algorithm>

namespace exitlab {

std::span<const double> state_at(const PathGrid& path, double t) {
    // last grid time <= t
    auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
    std::size_t idx = it == path.times.begin()
                          ? 0
                          : static_cast<std::size_t>(it - path.times.begin()) - 1;
    return path.state(idx);
}

}  // namespace exitlab
