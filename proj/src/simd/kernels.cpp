#include "exitlab/simd/kernels.hpp"

#include "exitlab/simd/isa.hpp"

namespace exitlab::simd {

void gaussian_fill(std::uint64_t master_seed, std::uint64_t path_index,
                   std::uint32_t substream, std::uint32_t block_start,
                   std::uint32_t block_count, double* out) {
    switch (active_isa()) {
#if defined(EXITLAB_HAVE_AVX2_KERNELS)
        case Isa::avx2:
            gaussian_fill_avx2(master_seed, path_index, substream, block_start, block_count, out);
            return;
#endif
#if defined(EXITLAB_HAVE_NEON_KERNELS)
        case Isa::neon:
            gaussian_fill_neon(master_seed, path_index, substream, block_start, block_count, out);
            return;
#endif
        default:
            gaussian_fill_scalar(master_seed, path_index, substream, block_start, block_count, out);
            return;
    }
}

std::size_t first_crossing_1d(const double* xs, std::size_t count, double center,
                              double radius) {
    switch (active_isa()) {
#if defined(EXITLAB_HAVE_AVX2_KERNELS)
        case Isa::avx2:
            return first_crossing_1d_avx2(xs, count, center, radius);
#endif
#if defined(EXITLAB_HAVE_NEON_KERNELS)
        case Isa::neon:
            return first_crossing_1d_neon(xs, count, center, radius);
#endif
        default:
            return first_crossing_1d_scalar(xs, count, center, radius);
    }
}

std::size_t first_crossing_2d(const double* xy, std::size_t count, double cx, double cy,
                              double radius) {
    switch (active_isa()) {
#if defined(EXITLAB_HAVE_AVX2_KERNELS)
        case Isa::avx2:
            return first_crossing_2d_avx2(xy, count, cx, cy, radius);
#endif
#if defined(EXITLAB_HAVE_NEON_KERNELS)
        case Isa::neon:
            return first_crossing_2d_neon(xy, count, cx, cy, radius);
#endif
        default:
            return first_crossing_2d_scalar(xy, count, cx, cy, radius);
    }
}

double max_abs_dev_1d(const double* xs, std::size_t count, double center) {
    switch (active_isa()) {
#if defined(EXITLAB_HAVE_AVX2_KERNELS)
        case Isa::avx2:
            return max_abs_dev_1d_avx2(xs, count, center);
#endif
#if defined(EXITLAB_HAVE_NEON_KERNELS)
        case Isa::neon:
            return max_abs_dev_1d_neon(xs, count, center);
#endif
        default:
            return max_abs_dev_1d_scalar(xs, count, center);
    }
}

double max_norm2_2d(const double* xy, std::size_t count, double cx, double cy) {
    switch (active_isa()) {
#if defined(EXITLAB_HAVE_AVX2_KERNELS)
        case Isa::avx2:
            return max_norm2_2d_avx2(xy, count, cx, cy);
#endif
#if defined(EXITLAB_HAVE_NEON_KERNELS)
        case Isa::neon:
            return max_norm2_2d_neon(xy, count, cx, cy);
#endif
        default:
            return max_norm2_2d_scalar(xy, count, cx, cy);
    }
}

}  // namespace exitlab::simd
