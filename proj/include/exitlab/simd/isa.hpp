#pragma once

namespace exitlab::simd {

enum class Isa {
    scalar,
    avx2,
    neon,
};

const char* isa_name(Isa isa);

// Best ISA the running CPU supports.
Isa detect_best_isa();

// Currently selected ISA. Defaults to detect_best_isa(); kernel outputs are
// bit-identical across ISAs, so the selection never changes results.
Isa active_isa();

// Overrides the selection (CLI flag / tests). Throws DomainError if the CPU
// cannot run the requested ISA.
void set_active_isa(Isa isa);

bool isa_supported(Isa isa);

}  // namespace exitlab::simd
