// AVX2 variants. Each arithmetic step mirrors the scalar reference in
// transform.hpp one-to-one (same op, same order), so outputs are bit-identical.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "exitlab/simd/kernels.hpp"
#include "exitlab/simd/transform.hpp"

namespace exitlab::simd {

namespace {

inline __m256d to_double_u52(__m256i u) {
    // exact for u < 2^52
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(u, magic)),
                         _mm256_set1_pd(kTwoPow52));
}

inline __m256d log_unit_vec(__m256d u) {
    const __m256i bits = _mm256_castpd_si256(u);
    const __m256d e_raw = to_double_u52(_mm256_srli_epi64(bits, 52));
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
        _mm256_set1_epi64x(0x3FF0000000000000ll)));
    const __m256d fold = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(_mm256_set1_pd(0.5), m), fold);
    const __m256d e =
        _mm256_add_pd(_mm256_sub_pd(e_raw, _mm256_set1_pd(1023.0)),
                      _mm256_and_pd(fold, _mm256_set1_pd(1.0)));
    const __m256d t = _mm256_div_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)),
                                    _mm256_add_pd(m, _mm256_set1_pd(1.0)));
    const __m256d w = _mm256_mul_pd(t, t);
    __m256d p = _mm256_set1_pd(kLogCoef[10]);
    for (int k = 9; k >= 0; --k) p = _mm256_fmadd_pd(p, w, _mm256_set1_pd(kLogCoef[k]));
    const __m256d q = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), t), p);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2), q);
}

inline void sincos_turns_vec(__m256d t, __m256d& sin_out, __m256d& cos_out) {
    const __m256d a = _mm256_mul_pd(_mm256_set1_pd(4.0), t);
    const __m256d k = _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d s = _mm256_mul_pd(_mm256_set1_pd(0.25), _mm256_sub_pd(a, k));
    const __m256d w = _mm256_mul_pd(s, s);
    __m256d ps = _mm256_set1_pd(kSinCoef[8]);
    for (int j = 7; j >= 0; --j) ps = _mm256_fmadd_pd(ps, w, _mm256_set1_pd(kSinCoef[j]));
    const __m256d sp = _mm256_mul_pd(s, ps);
    __m256d pc = _mm256_set1_pd(kCosCoef[9]);
    for (int j = 8; j >= 0; --j) pc = _mm256_fmadd_pd(pc, w, _mm256_set1_pd(kCosCoef[j]));
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d nsp = _mm256_xor_pd(sp, sign);
    const __m256d npc = _mm256_xor_pd(pc, sign);
    const __m256d m1 = _mm256_cmp_pd(k, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
    const __m256d m2 = _mm256_cmp_pd(k, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
    const __m256d m3 = _mm256_cmp_pd(k, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
    __m256d sn = sp;
    sn = _mm256_blendv_pd(sn, pc, m1);
    sn = _mm256_blendv_pd(sn, nsp, m2);
    sn = _mm256_blendv_pd(sn, npc, m3);
    __m256d cs = pc;
    cs = _mm256_blendv_pd(cs, nsp, m1);
    cs = _mm256_blendv_pd(cs, npc, m2);
    cs = _mm256_blendv_pd(cs, sp, m3);
    sin_out = sn;
    cos_out = cs;
}

// 32x32 -> (hi, lo) products on all eight u32 lanes.
inline void mul_hilo_u32x8(__m256i c, std::uint32_t mult, __m256i& hi, __m256i& lo) {
    const __m256i m = _mm256_set1_epi32(static_cast<int>(mult));
    const __m256i pe = _mm256_mul_epu32(c, m);
    const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(c, 32), m);
    const __m256i lo_mask = _mm256_set1_epi64x(0x00000000FFFFFFFFll);
    const __m256i hi_mask = _mm256_set1_epi64x(static_cast<long long>(0xFFFFFFFF00000000ull));
    lo = _mm256_or_si256(_mm256_and_si256(pe, lo_mask), _mm256_slli_epi64(po, 32));
    hi = _mm256_or_si256(_mm256_srli_epi64(pe, 32), _mm256_and_si256(po, hi_mask));
}

}  // namespace

void gaussian_fill_avx2(std::uint64_t master_seed, std::uint64_t path_index,
                        std::uint32_t substream, std::uint32_t block_start,
                        std::uint32_t block_count, double* out) {
    const std::uint32_t path_lo = static_cast<std::uint32_t>(path_index);
    const std::uint32_t path_hi = static_cast<std::uint32_t>(path_index >> 32);
    const std::uint32_t key0 = static_cast<std::uint32_t>(master_seed);
    const std::uint32_t key1 = static_cast<std::uint32_t>(master_seed >> 32);

    std::uint32_t b = 0;
    const __m256i lane_idx = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    for (; b + 8 <= block_count; b += 8) {
        __m256i c0 = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(block_start + b)),
                                      lane_idx);
        __m256i c1 = _mm256_set1_epi32(static_cast<int>(substream));
        __m256i c2 = _mm256_set1_epi32(static_cast<int>(path_lo));
        __m256i c3 = _mm256_set1_epi32(static_cast<int>(path_hi));
        std::uint32_t k0 = key0, k1 = key1;
        for (int round = 0; round < 10; ++round) {
            __m256i hi0, lo0, hi1, lo1;
            mul_hilo_u32x8(c0, kPhiloxM0, hi0, lo0);
            mul_hilo_u32x8(c2, kPhiloxM1, hi1, lo1);
            const __m256i k0v = _mm256_set1_epi32(static_cast<int>(k0));
            const __m256i k1v = _mm256_set1_epi32(static_cast<int>(k1));
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0v);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1v);
            c3 = lo0;
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        // raw_a = (x1 << 32) | x0, raw_b = (x3 << 32) | x2, blocks in order
        const __m256i a_lo = _mm256_unpacklo_epi32(c0, c1);  // blocks 0,1,4,5
        const __m256i a_hi = _mm256_unpackhi_epi32(c0, c1);  // blocks 2,3,6,7
        const __m256i b_lo = _mm256_unpacklo_epi32(c2, c3);
        const __m256i b_hi = _mm256_unpackhi_epi32(c2, c3);
        const __m256i raw_a[2] = {_mm256_permute2x128_si256(a_lo, a_hi, 0x20),
                                  _mm256_permute2x128_si256(a_lo, a_hi, 0x31)};
        const __m256i raw_b[2] = {_mm256_permute2x128_si256(b_lo, b_hi, 0x20),
                                  _mm256_permute2x128_si256(b_lo, b_hi, 0x31)};
        for (int half = 0; half < 2; ++half) {
            const __m256i ua = _mm256_add_epi64(_mm256_srli_epi64(raw_a[half], 13),
                                                _mm256_set1_epi64x(1));
            const __m256d u =
                _mm256_mul_pd(to_double_u52(ua), _mm256_set1_pd(kTwoPowM51));
            const __m256d t =
                _mm256_mul_pd(to_double_u52(_mm256_srli_epi64(raw_b[half], 13)),
                              _mm256_set1_pd(kTwoPowM51));
            const __m256d r = _mm256_sqrt_pd(
                _mm256_mul_pd(_mm256_set1_pd(-2.0), log_unit_vec(u)));
            __m256d sn, cs;
            sincos_turns_vec(t, sn, cs);
            const __m256d z0 = _mm256_mul_pd(r, cs);
            const __m256d z1 = _mm256_mul_pd(r, sn);
            const __m256d lo = _mm256_unpacklo_pd(z0, z1);
            const __m256d hi = _mm256_unpackhi_pd(z0, z1);
            double* dst = out + 2 * (b + 4 * half);
            _mm256_storeu_pd(dst, _mm256_permute2f128_pd(lo, hi, 0x20));
            _mm256_storeu_pd(dst + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
        }
    }
    if (b < block_count) {
        gaussian_fill_scalar(master_seed, path_index, substream, block_start + b,
                             block_count - b, out + 2 * b);
    }
}

std::size_t first_crossing_1d_avx2(const double* xs, std::size_t count, double center,
                                   double radius) {
    const __m256d c = _mm256_set1_pd(center);
    const __m256d r = _mm256_set1_pd(radius);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d d = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(xs + i), c), abs_mask);
        if (_mm256_movemask_pd(_mm256_cmp_pd(d, r, _CMP_GE_OQ)) != 0) {
            return i + first_crossing_1d_scalar(xs + i, 4, center, radius);
        }
    }
    if (i < count) {
        const std::size_t j = first_crossing_1d_scalar(xs + i, count - i, center, radius);
        return j == count - i ? count : i + j;
    }
    return count;
}

std::size_t first_crossing_2d_avx2(const double* xy, std::size_t count, double cx,
                                   double cy, double radius) {
    const double r2 = radius * radius;
    const __m256d c = _mm256_setr_pd(cx, cy, cx, cy);
    const __m256d r2v = _mm256_set1_pd(r2);
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(xy + 2 * i), c);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(xy + 2 * i + 4), c);
        const __m256d n2 = _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
        if (_mm256_movemask_pd(_mm256_cmp_pd(n2, r2v, _CMP_GE_OQ)) != 0) {
            return i + first_crossing_2d_scalar(xy + 2 * i, 4, cx, cy, radius);
        }
    }
    if (i < count) {
        const std::size_t j = first_crossing_2d_scalar(xy + 2 * i, count - i, cx, cy, radius);
        return j == count - i ? count : i + j;
    }
    return count;
}

double max_abs_dev_1d_avx2(const double* xs, std::size_t count, double center) {
    const __m256d c = _mm256_set1_pd(center);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d d = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(xs + i), c), abs_mask);
        acc = _mm256_max_pd(acc, d);
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
    for (; i < count; ++i) {
        const double d = xs[i] - center;
        const double a = d < 0 ? -d : d;
        m = a > m ? a : m;
    }
    return m;
}

double max_norm2_2d_avx2(const double* xy, std::size_t count, double cx, double cy) {
    const __m256d c = _mm256_setr_pd(cx, cy, cx, cy);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(xy + 2 * i), c);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(xy + 2 * i + 4), c);
        acc = _mm256_max_pd(acc, _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1)));
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
    for (; i < count; ++i) {
        const double dx = xy[2 * i] - cx;
        const double dy = xy[2 * i + 1] - cy;
        const double n2 = dx * dx + dy * dy;
        m = n2 > m ? n2 : m;
    }
    return m;
}

}  // namespace exitlab::simd

#endif  // x86_64
