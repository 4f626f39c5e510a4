#pragma once

#include <cstddef>
#include <cstdint>

#include "exitlab/simd/isa.hpp"

namespace exitlab::simd {

// Data-parallel inner-loop kernels. Each has a scalar reference implementation
// and (where the platform provides them) AVX2/NEON variants selected through
// active_isa(). All variants return bit-identical results.

// Fills out[0 .. 2*block_count) with N(0,1) draws; counter block `block_start+b`
// produces out[2b] and out[2b+1].
void gaussian_fill(std::uint64_t master_seed, std::uint64_t path_index,
                   std::uint32_t substream, std::uint32_t block_start,
                   std::uint32_t block_count, double* out);

// First index i with |xs[i] - center| >= radius, or count if none.
std::size_t first_crossing_1d(const double* xs, std::size_t count, double center,
                              double radius);

// xy holds interleaved (x, y) points; first index with
// dx*dx + dy*dy >= radius*radius, or count if none.
std::size_t first_crossing_2d(const double* xy, std::size_t count, double cx, double cy,
                              double radius);

// max_i |xs[i] - center|; 0 for empty input.
double max_abs_dev_1d(const double* xs, std::size_t count, double center);

// max_i (dx*dx + dy*dy) over interleaved points; 0 for empty input.
double max_norm2_2d(const double* xy, std::size_t count, double cx, double cy);

// Per-ISA entry points (exposed for the equivalence tests).
void gaussian_fill_scalar(std::uint64_t master_seed, std::uint64_t path_index,
                          std::uint32_t substream, std::uint32_t block_start,
                          std::uint32_t block_count, double* out);
std::size_t first_crossing_1d_scalar(const double* xs, std::size_t count, double center,
                                     double radius);
std::size_t first_crossing_2d_scalar(const double* xy, std::size_t count, double cx,
                                     double cy, double radius);
double max_abs_dev_1d_scalar(const double* xs, std::size_t count, double center);
double max_norm2_2d_scalar(const double* xy, std::size_t count, double cx, double cy);

#if defined(__x86_64__) || defined(_M_X64)
#define EXITLAB_HAVE_AVX2_KERNELS 1
void gaussian_fill_avx2(std::uint64_t master_seed, std::uint64_t path_index,
                        std::uint32_t substream, std::uint32_t block_start,
                        std::uint32_t block_count, double* out);
std::size_t first_crossing_1d_avx2(const double* xs, std::size_t count, double center,
                                   double radius);
std::size_t first_crossing_2d_avx2(const double* xy, std::size_t count, double cx,
                                   double cy, double radius);
double max_abs_dev_1d_avx2(const double* xs, std::size_t count, double center);
double max_norm2_2d_avx2(const double* xy, std::size_t count, double cx, double cy);
#endif

#if defined(__aarch64__)
#define EXITLAB_HAVE_NEON_KERNELS 1
void gaussian_fill_neon(std::uint64_t master_seed, std::uint64_t path_index,
                        std::uint32_t substream, std::uint32_t block_start,
                        std::uint32_t block_count, double* out);
std::size_t first_crossing_1d_neon(const double* xs, std::size_t count, double center,
                                   double radius);
std::size_t first_crossing_2d_neon(const double* xy, std::size_t count, double cx,
                                   double cy, double radius);
double max_abs_dev_1d_neon(const double* xs, std::size_t count, double center);
double max_norm2_2d_neon(const double* xy, std::size_t count, double cx, double cy);
#endif

}  // namespace exitlab::simd
