#include <cmath>
#include <cstddef>
#include <cstdint>

#include "exitlab/simd/kernels.hpp"
#include "exitlab/simd/transform.hpp"

namespace exitlab::simd {

void gaussian_fill_scalar(std::uint64_t master_seed, std::uint64_t path_index,
                          std::uint32_t substream, std::uint32_t block_start,
                          std::uint32_t block_count, double* out) {
    for (std::uint32_t b = 0; b < block_count; ++b) {
        std::uint64_t raw_a, raw_b;
        raws_for_block(master_seed, path_index, substream, block_start + b, raw_a, raw_b);
        gaussian_pair(raw_a, raw_b, out[2 * b], out[2 * b + 1]);
    }
}

std::size_t first_crossing_1d_scalar(const double* xs, std::size_t count, double center,
                                     double radius) {
    for (std::size_t i = 0; i < count; ++i) {
        if (std::abs(xs[i] - center) >= radius) return i;
    }
    return count;
}

std::size_t first_crossing_2d_scalar(const double* xy, std::size_t count, double cx,
                                     double cy, double radius) {
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < count; ++i) {
        const double dx = xy[2 * i] - cx;
        const double dy = xy[2 * i + 1] - cy;
        if (dx * dx + dy * dy >= r2) return i;
    }
    return count;
}

double max_abs_dev_1d_scalar(const double* xs, std::size_t count, double center) {
    double m = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = std::abs(xs[i] - center);
        m = d > m ? d : m;
    }
    return m;
}

double max_norm2_2d_scalar(const double* xy, std::size_t count, double cx, double cy) {
    double m = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double dx = xy[2 * i] - cx;
        const double dy = xy[2 * i + 1] - cy;
        const double n2 = dx * dx + dy * dy;
        m = n2 > m ? n2 : m;
    }
    return m;
}

}  // namespace exitlab::simd
