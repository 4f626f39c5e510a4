#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "exitlab/simd/isa.hpp"
#include "exitlab/simd/kernels.hpp"
#include "exitlab/simd/philox.hpp"
#include "exitlab/simd/transform.hpp"

using namespace exitlab::simd;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Test vectors from the reference implementation's kat_vectors file.
    auto out = philox4x32_10({0u, 0u, 0u, 0u}, 0u, 0u);
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffu,
                        0xffffffffu);
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, 0xa4093822u,
                        0x299f31d0u);
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("scalar transform helpers agree with libm") {
    for (int i = 1; i <= 20000; ++i) {
        const double u = static_cast<double>(i) / 20000.0;
        CHECK(std::abs(log_unit(u) - std::log(u)) <= 1e-12 * (1.0 + std::abs(std::log(u))));
    }
    for (int i = 0; i < 20000; ++i) {
        const double t = static_cast<double>(i) / 20000.0;
        double s, c;
        sincos_turns(t, s, c);
        CHECK(std::abs(s - std::sin(2.0 * std::numbers::pi * t)) <= 1e-13);
        CHECK(std::abs(c - std::cos(2.0 * std::numbers::pi * t)) <= 1e-13);
    }
}

TEST_CASE("scalar gaussian_fill is deterministic and key-sensitive") {
    std::vector<double> a(2000), b(2000);
    gaussian_fill_scalar(42, 7, 0, 0, 1000, a.data());
    gaussian_fill_scalar(42, 7, 0, 0, 1000, b.data());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

    gaussian_fill_scalar(42, 8, 0, 0, 1000, b.data());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0);
    gaussian_fill_scalar(42, 7, 1, 0, 1000, b.data());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0);
    gaussian_fill_scalar(43, 7, 0, 0, 1000, b.data());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0);

    // block-contiguity: filling [0,1000) equals [0,500) + [500,1000)
    gaussian_fill_scalar(42, 7, 0, 0, 500, b.data());
    gaussian_fill_scalar(42, 7, 0, 500, 500, b.data() + 1000);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

#if defined(EXITLAB_HAVE_AVX2_KERNELS)
TEST_CASE("avx2 kernels are bit-identical to scalar") {
    if (!isa_supported(Isa::avx2)) return;

    for (std::uint32_t count : {1u, 2u, 7u, 8u, 9u, 64u, 1000u, 4099u}) {
        for (std::uint32_t start : {0u, 1u, 13u}) {
            std::vector<double> s(2 * count), v(2 * count);
            gaussian_fill_scalar(0xDEADBEEFCAFEBABEull, 1234567, 3, start, count, s.data());
            gaussian_fill_avx2(0xDEADBEEFCAFEBABEull, 1234567, 3, start, count, v.data());
            CHECK(std::memcmp(s.data(), v.data(), s.size() * sizeof(double)) == 0);
        }
    }

    // scan and reduction kernels over pseudo-random data
    std::vector<double> xs(5004);
    gaussian_fill_scalar(99, 0, 0, 0, xs.size() / 2, xs.data());
    xs.pop_back();  // odd length exercises the tail paths
    for (double r : {0.5, 1.0, 2.5, 100.0}) {
        CHECK(first_crossing_1d_avx2(xs.data(), xs.size(), 0.1, r) ==
              first_crossing_1d_scalar(xs.data(), xs.size(), 0.1, r));
    }
    CHECK(max_abs_dev_1d_avx2(xs.data(), xs.size(), 0.1) ==
          max_abs_dev_1d_scalar(xs.data(), xs.size(), 0.1));

    const std::size_t pts = xs.size() / 2;
    for (double r : {0.5, 1.5, 3.0, 100.0}) {
        CHECK(first_crossing_2d_avx2(xs.data(), pts, 0.1, -0.2, r) ==
              first_crossing_2d_scalar(xs.data(), pts, 0.1, -0.2, r));
    }
    CHECK(max_norm2_2d_avx2(xs.data(), pts, 0.1, -0.2) ==
          max_norm2_2d_scalar(xs.data(), pts, 0.1, -0.2));
}
#endif

TEST_CASE("crossing scans: hand cases") {
    const std::vector<double> xs{0.0, 0.5, -0.7, 0.99, 1.0, 0.2};
    CHECK(first_crossing_1d_scalar(xs.data(), xs.size(), 0.0, 1.0) == 4);
    CHECK(first_crossing_1d_scalar(xs.data(), xs.size(), 0.0, 2.0) == xs.size());
    CHECK(max_abs_dev_1d_scalar(xs.data(), xs.size(), 0.0) == 1.0);

    // interleaved 2d points: (0,0), (0.6,0.7), (3,4)
    const std::vector<double> xy{0.0, 0.0, 0.6, 0.7, 3.0, 4.0};
    CHECK(first_crossing_2d_scalar(xy.data(), 3, 0.0, 0.0, 0.9) == 1);
    CHECK(first_crossing_2d_scalar(xy.data(), 3, 0.0, 0.0, 5.0) == 2);
    CHECK(first_crossing_2d_scalar(xy.data(), 3, 0.0, 0.0, 6.0) == 3);
    CHECK(max_norm2_2d_scalar(xy.data(), 3, 0.0, 0.0) == 25.0);
}

TEST_CASE("isa dispatch honors overrides") {
    const Isa best = detect_best_isa();
    CHECK(isa_supported(best));
    set_active_isa(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    std::vector<double> a(64), b(64);
    gaussian_fill(1, 2, 0, 0, 32, a.data());
    gaussian_fill_scalar(1, 2, 0, 0, 32, b.data());
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
    set_active_isa(best);
    CHECK(active_isa() == best);
}
