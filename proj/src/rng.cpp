#include "exitlab/rng.hpp"

#include <cmath>
#include <limits>

#include "exitlab/errors.hpp"
#include "exitlab/simd/kernels.hpp"
#include "exitlab/simd/transform.hpp"

namespace exitlab {

namespace {
constexpr std::size_t kMinBufferBlocks = 64;    // 128 draws on the first refill
constexpr std::size_t kMaxBufferBlocks = 1024;  // 2048 draws once a path proves long

void check_blocks_available(std::uint32_t next_block, std::size_t blocks) {
    if (blocks > std::numeric_limits<std::uint32_t>::max() - next_block) {
        throw NumericError("random stream exhausted: block counter would overflow");
    }
}
}  // namespace

std::vector<double> gaussian_increments(const StreamKey& key, std::size_t count,
                                        double variance) {
    if (variance < 0.0) throw DomainError("gaussian_increments: variance must be >= 0");
    if (count == 0) return {};
    std::vector<double> out(count);
    if (variance == 0.0) return out;  // exact zeros

    const std::size_t blocks = (count + 1) / 2;
    check_blocks_available(0, blocks);
    std::vector<double> raw(2 * blocks);
    simd::gaussian_fill(key.master_seed, key.path_index, key.substream, 0,
                        static_cast<std::uint32_t>(blocks), raw.data());
    const double scale = std::sqrt(variance);
    for (std::size_t i = 0; i < count; ++i) out[i] = scale * raw[i];
    return out;
}

GaussianStream::GaussianStream(const StreamKey& key) : key_(key) {}

void GaussianStream::refill() {
    const std::size_t blocks =
        buf_.empty() ? kMinBufferBlocks : std::min(kMaxBufferBlocks, buf_.size());
    check_blocks_available(next_block_, blocks);
    buf_.resize(2 * blocks);
    simd::gaussian_fill(key_.master_seed, key_.path_index, key_.substream, next_block_,
                        static_cast<std::uint32_t>(blocks), buf_.data());
    next_block_ += static_cast<std::uint32_t>(blocks);
    pos_ = 0;
}

UniformPair uniform_pair_at(const StreamKey& key, std::uint32_t block) {
    std::uint64_t raw_a, raw_b;
    simd::raws_for_block(key.master_seed, key.path_index, key.substream, block, raw_a, raw_b);
    return {simd::unit_pos(raw_a), simd::unit_half_open(raw_b)};
}

}  // namespace exitlab
