#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#include "exitlab/simd/philox.hpp"

namespace exitlab::simd {

// Scalar reference arithmetic for the counter -> N(0,1) pipeline. The AVX2 and
// NEON kernels mirror this operation sequence instruction for instruction;
// every step is an IEEE-exact or correctly-rounded operation (add/sub/mul/div/
// sqrt/fma), so all lanes produce bit-identical output. Equivalence tests in
// tests/test_simd_kernels.cpp enforce this.

inline constexpr double kSqrt2 = 0x1.6a09e667f3bcdp+0;
inline constexpr double kLn2 = 0x1.62e42fefa39efp-1;
inline constexpr double kTwoPow52 = 0x1p+52;
inline constexpr double kTwoPowM51 = 0x1p-51;

// atanh series: ln m = 2 t P(t^2), t = (m-1)/(m+1), m in [sqrt2/2, sqrt2].
inline constexpr double kLogCoef[11] = {
    1.0,        1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,  1.0 / 9.0,  1.0 / 11.0,
    1.0 / 13.0, 1.0 / 15.0, 1.0 / 17.0, 1.0 / 19.0, 1.0 / 21.0,
};

// sin(2 pi s) = s * sum_j kSinCoef[j] (s^2)^j, |s| <= 1/8.
inline constexpr double kSinCoef[9] = {
    0x1.921fb54442d18p+2,  -0x1.4abbce625be53p+5, 0x1.466bc6775aae2p+6,
    -0x1.32d2cce62bd86p+6, 0x1.50783487ee782p+5,  -0x1.e3074fde8871fp+3,
    0x1.e8f434d018d63p+1,  -0x1.6fadb9f155744p-1, 0x1.aaec32af93359p-4,
};

// cos(2 pi s) = sum_j kCosCoef[j] (s^2)^j, |s| <= 1/8.
inline constexpr double kCosCoef[10] = {
    0x1p+0,
    -0x1.3bd3cc9be45dep+4,
    0x1.03c1f081b5ac4p+6,
    -0x1.55d3c7e3cbffap+6,
    0x1.e1f506891babbp+5,
    -0x1.a6d1f2a204a8cp+4,
    0x1.f9d38a3763cc3p+2,
    -0x1.b6e24f44b128fp+0,
    0x1.20c62c2f2d7f5p-2,
    -0x1.2a0c591af8314p-5,
};

// 51-bit uniform in (0, 1] (never 0, so ln is finite).
inline double unit_pos(std::uint64_t raw) {
    const std::uint64_t u = (raw >> 13) + 1;  // <= 2^51 < 2^52
    const double d = std::bit_cast<double>(u | 0x4330000000000000ull) - kTwoPow52;
    return d * kTwoPowM51;
}

// 51-bit uniform in [0, 1).
inline double unit_half_open(std::uint64_t raw) {
    const std::uint64_t u = raw >> 13;
    const double d = std::bit_cast<double>(u | 0x4330000000000000ull) - kTwoPow52;
    return d * kTwoPowM51;
}

// ln u for u in (0, 1]; u is a positive normal double.
inline double log_unit(double u) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(u);
    const double e_raw =
        std::bit_cast<double>((bits >> 52) | 0x4330000000000000ull) - kTwoPow52;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
    const bool fold = m > kSqrt2;
    m = fold ? 0.5 * m : m;
    const double e = (e_raw - 1023.0) + (fold ? 1.0 : 0.0);
    const double t = (m - 1.0) / (m + 1.0);
    const double w = t * t;
    double p = kLogCoef[10];
    for (int k = 9; k >= 0; --k) p = std::fma(p, w, kLogCoef[k]);
    return std::fma(e, kLn2, (2.0 * t) * p);
}

// sin/cos of 2 pi t for t in [0, 1).
inline void sincos_turns(double t, double& sin_out, double& cos_out) {
    const double a = 4.0 * t;
    const double k = std::nearbyint(a);  // round half to even, k in {0..4}
    const double s = 0.25 * (a - k);     // |s| <= 1/8
    const double w = s * s;
    double ps = kSinCoef[8];
    for (int j = 7; j >= 0; --j) ps = std::fma(ps, w, kSinCoef[j]);
    const double sp = s * ps;
    double pc = kCosCoef[9];
    for (int j = 8; j >= 0; --j) pc = std::fma(pc, w, kCosCoef[j]);
    if (k == 0.0 || k == 4.0) {
        sin_out = sp;
        cos_out = pc;
    } else if (k == 1.0) {
        sin_out = pc;
        cos_out = -sp;
    } else if (k == 2.0) {
        sin_out = -sp;
        cos_out = -pc;
    } else {
        sin_out = -pc;
        cos_out = sp;
    }
}

// One counter block -> two N(0,1) draws via Box-Muller.
inline void gaussian_pair(std::uint64_t raw_a, std::uint64_t raw_b, double& z0, double& z1) {
    const double u = unit_pos(raw_a);
    const double t = unit_half_open(raw_b);
    const double r = std::sqrt(-2.0 * log_unit(u));
    double sn, cs;
    sincos_turns(t, sn, cs);
    z0 = r * cs;
    z1 = r * sn;
}

inline void raws_for_block(std::uint64_t master_seed, std::uint64_t path_index,
                           std::uint32_t substream, std::uint32_t block,
                           std::uint64_t& raw_a, std::uint64_t& raw_b) {
    const auto x = philox4x32_10(
        {block, substream, static_cast<std::uint32_t>(path_index),
         static_cast<std::uint32_t>(path_index >> 32)},
        static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32));
    raw_a = (static_cast<std::uint64_t>(x[1]) << 32) | x[0];
    raw_b = (static_cast<std::uint64_t>(x[3]) << 32) | x[2];
}

}  // namespace exitlab::simd
