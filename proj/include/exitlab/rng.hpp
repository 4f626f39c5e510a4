#pragma once

#include <cstdint>
#include <vector>

namespace exitlab {

// Identifies one deterministic stream. Distinct (master_seed, path_index,
// substream) triples give statistically independent streams; regenerating a
// stream from the same key reproduces the identical draw sequence regardless
// of thread schedule.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    std::uint32_t substream = 0;
};

// Reserved substreams inside one path.
inline constexpr std::uint32_t kMainSubstream = 0;
inline constexpr std::uint32_t kDetectorSubstream = 1;
inline constexpr std::uint32_t kRefineSubstreamBase = 2;  // + step index

// Reserved path_index ranges so auxiliary samplers never collide with
// experiment paths (which use small indices).
inline constexpr std::uint64_t kControlPathBase = 1ull << 40;
inline constexpr std::uint64_t kReferencePathBase = 1ull << 41;
inline constexpr std::uint64_t kCalibrationPathBase = 1ull << 42;

// count i.i.d. Normal(0, variance) draws; deterministic in key.
// variance < 0 -> DomainError.
std::vector<double> gaussian_increments(const StreamKey& key, std::size_t count,
                                        double variance);

// Buffered sequential consumer of one stream's N(0,1) draws. Value-like and
// single-consumer; make one per (path, substream).
class GaussianStream {
  public:
    explicit GaussianStream(const StreamKey& key);

    double next() {
        if (pos_ == buf_.size()) refill();
        return buf_[pos_++];
    }

    void next_n(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = next();
    }

    const StreamKey& key() const { return key_; }

  private:
    void refill();

    StreamKey key_;
    std::vector<double> buf_;
    std::size_t pos_ = 0;
    std::uint32_t next_block_ = 0;
};

// The two uniforms carried by one counter block: first in (0,1], second in
// [0,1). O(1) random access by block index so callers can skip blocks without
// disturbing stream accounting.
struct UniformPair {
    double first;
    double second;
};
UniformPair uniform_pair_at(const StreamKey& key, std::uint32_t block);

}  // namespace exitlab
