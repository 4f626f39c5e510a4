#include "exitlab/simd/isa.hpp"

#include <atomic>
#include <string>

#include "exitlab/errors.hpp"

namespace exitlab::simd {

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;  // baseline on aarch64
#else
            return false;
#endif
    }
    return false;
}

Isa detect_best_isa() {
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

namespace {
std::atomic<Isa> g_active{detect_best_isa()};
}

Isa active_isa() { return g_active.load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw DomainError(std::string("kernel ISA not supported on this CPU: ") + isa_name(isa));
    }
    g_active.store(isa, std::memory_order_relaxed);
}

}  // namespace exitlab::simd
