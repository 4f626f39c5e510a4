#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exitlab/linalg.hpp"

namespace exitlab {

enum class ReferenceKind { stopped_sigma_bm, uniform_sphere, two_point };

const char* reference_kind_name(ReferenceKind k);

// Draws from one of the limit laws experiments are tested against.
struct ReferenceSample {
    ReferenceKind kind = ReferenceKind::two_point;
    std::size_t dimension = 1;
    std::vector<double> taus;  // empty when the law carries no exit time
    Matrix values;             // draws x dimension

    std::size_t count() const { return values.rows; }
};

// Exit value and exit time of sigma * W from the unit ball, simulated with
// substepped detection at the given (fine) step. sigma must have some positive
// diagonal of sigma sigma'.
ReferenceSample sample_stopped_sigma_bm(const Matrix& sigma, std::size_t count, double step,
                                        std::uint64_t master_seed, unsigned workers = 1);

// i.i.d. unit vectors (normalized Gaussians).
ReferenceSample sample_uniform_sphere(std::size_t dimension, std::size_t count,
                                      std::uint64_t master_seed);

// Fair +-1 draws.
ReferenceSample exact_two_point(std::size_t count, std::uint64_t master_seed);

void save_reference_csv(const ReferenceSample& sample, const std::string& path);
ReferenceSample load_reference_csv(const std::string& path);

}  // namespace exitlab
