// NEON (aarch64) variants, two counter blocks per iteration. Arithmetic mirrors
// the scalar reference in transform.hpp; fma/div/sqrt are correctly rounded on
// aarch64, so outputs are bit-identical to the scalar kernel.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>
#include <cstdint>

#include "exitlab/simd/kernels.hpp"
#include "exitlab/simd/transform.hpp"

namespace exitlab::simd {

namespace {

inline float64x2_t horner_step(float64x2_t p, float64x2_t w, double coef) {
    return vfmaq_f64(vdupq_n_f64(coef), p, w);  // p*w + coef
}

inline float64x2_t log_unit_vec(float64x2_t u) {
    const uint64x2_t bits = vreinterpretq_u64_f64(u);
    const float64x2_t e_raw = vcvtq_f64_u64(vshrq_n_u64(bits, 52));
    float64x2_t m = vreinterpretq_f64_u64(
        vorrq_u64(vandq_u64(bits, vdupq_n_u64(0x000FFFFFFFFFFFFFull)),
                  vdupq_n_u64(0x3FF0000000000000ull)));
    const uint64x2_t fold = vcgtq_f64(m, vdupq_n_f64(kSqrt2));
    m = vbslq_f64(fold, vmulq_f64(vdupq_n_f64(0.5), m), m);
    const float64x2_t one_if_fold =
        vreinterpretq_f64_u64(vandq_u64(fold, vreinterpretq_u64_f64(vdupq_n_f64(1.0))));
    const float64x2_t e = vaddq_f64(vsubq_f64(e_raw, vdupq_n_f64(1023.0)), one_if_fold);
    const float64x2_t t =
        vdivq_f64(vsubq_f64(m, vdupq_n_f64(1.0)), vaddq_f64(m, vdupq_n_f64(1.0)));
    const float64x2_t w = vmulq_f64(t, t);
    float64x2_t p = vdupq_n_f64(kLogCoef[10]);
    for (int k = 9; k >= 0; --k) p = horner_step(p, w, kLogCoef[k]);
    const float64x2_t q = vmulq_f64(vmulq_f64(vdupq_n_f64(2.0), t), p);
    return vfmaq_f64(q, e, vdupq_n_f64(kLn2));  // e*ln2 + q
}

inline void sincos_turns_vec(float64x2_t t, float64x2_t& sin_out, float64x2_t& cos_out) {
    const float64x2_t a = vmulq_f64(vdupq_n_f64(4.0), t);
    const float64x2_t k = vrndnq_f64(a);
    const float64x2_t s = vmulq_f64(vdupq_n_f64(0.25), vsubq_f64(a, k));
    const float64x2_t w = vmulq_f64(s, s);
    float64x2_t ps = vdupq_n_f64(kSinCoef[8]);
    for (int j = 7; j >= 0; --j) ps = horner_step(ps, w, kSinCoef[j]);
    const float64x2_t sp = vmulq_f64(s, ps);
    float64x2_t pc = vdupq_n_f64(kCosCoef[9]);
    for (int j = 8; j >= 0; --j) pc = horner_step(pc, w, kCosCoef[j]);
    const uint64x2_t sign = vdupq_n_u64(0x8000000000000000ull);
    const float64x2_t nsp = vreinterpretq_f64_u64(veorq_u64(vreinterpretq_u64_f64(sp), sign));
    const float64x2_t npc = vreinterpretq_f64_u64(veorq_u64(vreinterpretq_u64_f64(pc), sign));
    const uint64x2_t m1 = vceqq_f64(k, vdupq_n_f64(1.0));
    const uint64x2_t m2 = vceqq_f64(k, vdupq_n_f64(2.0));
    const uint64x2_t m3 = vceqq_f64(k, vdupq_n_f64(3.0));
    float64x2_t sn = sp;
    sn = vbslq_f64(m1, pc, sn);
    sn = vbslq_f64(m2, nsp, sn);
    sn = vbslq_f64(m3, npc, sn);
    float64x2_t cs = pc;
    cs = vbslq_f64(m1, nsp, cs);
    cs = vbslq_f64(m2, npc, cs);
    cs = vbslq_f64(m3, sp, cs);
    sin_out = sn;
    cos_out = cs;
}

inline void mul_hilo_u32x2(uint32x2_t c, std::uint32_t mult, uint32x2_t& hi, uint32x2_t& lo) {
    const uint64x2_t p = vmull_u32(c, vdup_n_u32(mult));
    hi = vmovn_u64(vshrq_n_u64(p, 32));
    lo = vmovn_u64(p);
}

}  // namespace

void gaussian_fill_neon(std::uint64_t master_seed, std::uint64_t path_index,
                        std::uint32_t substream, std::uint32_t block_start,
                        std::uint32_t block_count, double* out) {
    const std::uint32_t key0 = static_cast<std::uint32_t>(master_seed);
    const std::uint32_t key1 = static_cast<std::uint32_t>(master_seed >> 32);
    std::uint32_t b = 0;
    for (; b + 2 <= block_count; b += 2) {
        const std::uint32_t base = block_start + b;
        uint32x2_t c0 = {base, base + 1};
        uint32x2_t c1 = vdup_n_u32(substream);
        uint32x2_t c2 = vdup_n_u32(static_cast<std::uint32_t>(path_index));
        uint32x2_t c3 = vdup_n_u32(static_cast<std::uint32_t>(path_index >> 32));
        std::uint32_t k0 = key0, k1 = key1;
        for (int round = 0; round < 10; ++round) {
            uint32x2_t hi0, lo0, hi1, lo1;
            mul_hilo_u32x2(c0, kPhiloxM0, hi0, lo0);
            mul_hilo_u32x2(c2, kPhiloxM1, hi1, lo1);
            c0 = veor_u32(veor_u32(hi1, c1), vdup_n_u32(k0));
            c1 = lo1;
            c2 = veor_u32(veor_u32(hi0, c3), vdup_n_u32(k1));
            c3 = lo0;
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        const uint64x2_t raw_a =
            vorrq_u64(vshlq_n_u64(vmovl_u32(c1), 32), vmovl_u32(c0));
        const uint64x2_t raw_b =
            vorrq_u64(vshlq_n_u64(vmovl_u32(c3), 32), vmovl_u32(c2));
        const float64x2_t u = vmulq_f64(
            vcvtq_f64_u64(vaddq_u64(vshrq_n_u64(raw_a, 13), vdupq_n_u64(1))),
            vdupq_n_f64(kTwoPowM51));
        const float64x2_t t =
            vmulq_f64(vcvtq_f64_u64(vshrq_n_u64(raw_b, 13)), vdupq_n_f64(kTwoPowM51));
        const float64x2_t r =
            vsqrtq_f64(vmulq_f64(vdupq_n_f64(-2.0), log_unit_vec(u)));
        float64x2_t sn, cs;
        sincos_turns_vec(t, sn, cs);
        float64x2x2_t pair;
        pair.val[0] = vmulq_f64(r, cs);
        pair.val[1] = vmulq_f64(r, sn);
        vst2q_f64(out + 2 * b, pair);
    }
    if (b < block_count) {
        gaussian_fill_scalar(master_seed, path_index, substream, block_start + b,
                             block_count - b, out + 2 * b);
    }
}

std::size_t first_crossing_1d_neon(const double* xs, std::size_t count, double center,
                                   double radius) {
    const float64x2_t c = vdupq_n_f64(center);
    const float64x2_t r = vdupq_n_f64(radius);
    std::size_t i = 0;
    for (; i + 2 <= count; i += 2) {
        const float64x2_t d = vabsq_f64(vsubq_f64(vld1q_f64(xs + i), c));
        const uint64x2_t ge = vcgeq_f64(d, r);
        if (vgetq_lane_u64(ge, 0) | vgetq_lane_u64(ge, 1)) {
            return i + first_crossing_1d_scalar(xs + i, 2, center, radius);
        }
    }
    if (i < count) {
        const std::size_t j = first_crossing_1d_scalar(xs + i, count - i, center, radius);
        return j == count - i ? count : i + j;
    }
    return count;
}

std::size_t first_crossing_2d_neon(const double* xy, std::size_t count, double cx,
                                   double cy, double radius) {
    const double r2 = radius * radius;
    std::size_t i = 0;
    for (; i + 2 <= count; i += 2) {
        const float64x2x2_t p = vld2q_f64(xy + 2 * i);  // val[0]=xs, val[1]=ys
        const float64x2_t dx = vsubq_f64(p.val[0], vdupq_n_f64(cx));
        const float64x2_t dy = vsubq_f64(p.val[1], vdupq_n_f64(cy));
        const float64x2_t n2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
        const uint64x2_t ge = vcgeq_f64(n2, vdupq_n_f64(r2));
        if (vgetq_lane_u64(ge, 0) | vgetq_lane_u64(ge, 1)) {
            return i + first_crossing_2d_scalar(xy + 2 * i, 2, cx, cy, radius);
        }
    }
    if (i < count) {
        const std::size_t j = first_crossing_2d_scalar(xy + 2 * i, count - i, cx, cy, radius);
        return j == count - i ? count : i + j;
    }
    return count;
}

double max_abs_dev_1d_neon(const double* xs, std::size_t count, double center) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= count; i += 2) {
        acc = vmaxq_f64(acc, vabsq_f64(vsubq_f64(vld1q_f64(xs + i), vdupq_n_f64(center))));
    }
    double m = vmaxvq_f64(acc);
    for (; i < count; ++i) {
        const double d = xs[i] - center;
        const double a = d < 0 ? -d : d;
        m = a > m ? a : m;
    }
    return m;
}

double max_norm2_2d_neon(const double* xy, std::size_t count, double cx, double cy) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= count; i += 2) {
        const float64x2x2_t p = vld2q_f64(xy + 2 * i);
        const float64x2_t dx = vsubq_f64(p.val[0], vdupq_n_f64(cx));
        const float64x2_t dy = vsubq_f64(p.val[1], vdupq_n_f64(cy));
        acc = vmaxq_f64(acc, vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)));
    }
    double m = vmaxvq_f64(acc);
    for (; i < count; ++i) {
        const double dx = xy[2 * i] - cx;
        const double dy = xy[2 * i + 1] - cy;
        const double n2 = dx * dx + dy * dy;
        m = n2 > m ? n2 : m;
    }
    return m;
}

}  // namespace exitlab::simd

#endif  // __aarch64__
