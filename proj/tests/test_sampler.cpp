#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "refill3d/sampler.hpp"

#include "test_support.hpp"

#include <cmath>

using namespace refill3d;

namespace {

// Linear ramp with exactly representable coefficients, so bilinear
// interpolation at dyadic sample points is exact in double arithmetic.
ImageF ramp_image(int width, int height) {
    ImageF img(width, height, 1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.at(x, y) = 0.25f * x + 0.125f * y + 0.0625f;
    return img;
}

}  // namespace

TEST_CASE("bilinear_sample reproduces pixel values at integer coordinates") {
    const ImageF img = testsupport::noise_image(9, 7, 3, 101);
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 9; ++x) {
            const auto s = bilinear_sample(img, x, y);
            REQUIRE(s.has_value());
            for (int c = 0; c < 3; ++c) CHECK((*s)[c] == static_cast<double>(img.at(x, y, c)));
        }
    }
}

TEST_CASE("bilinear_sample interpolates a 2x2 cell midpoint") {
    ImageF img(2, 2, 1);
    img.at(0, 0) = 0.0f;
    img.at(1, 0) = 1.0f;
    img.at(0, 1) = 0.5f;
    img.at(1, 1) = 0.25f;
    const auto s = bilinear_sample(img, 0.5, 0.5);
    REQUIRE(s.has_value());
    CHECK((*s)[0] == doctest::Approx(0.4375).epsilon(1e-15));

    const auto top = bilinear_sample(img, 0.5, 0.0);
    REQUIRE(top.has_value());
    CHECK((*top)[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("bilinear_sample handles the image border") {
    const ImageF img = testsupport::noise_image(5, 4, 1, 55);

    SUBCASE("the far corner is sampled exactly") {
        const auto s = bilinear_sample(img, 4.0, 3.0);
        REQUIRE(s.has_value());
        CHECK((*s)[0] == static_cast<double>(img.at(4, 3)));
    }

    SUBCASE("coordinates outside the domain return empty") {
        CHECK_FALSE(bilinear_sample(img, -0.001, 1.0).has_value());
        CHECK_FALSE(bilinear_sample(img, 4.001, 1.0).has_value());
        CHECK_FALSE(bilinear_sample(img, 1.0, -0.001).has_value());
        CHECK_FALSE(bilinear_sample(img, 1.0, 3.001).has_value());
    }

    SUBCASE("edge coordinates interpolate along the border row") {
        const auto s = bilinear_sample(img, 1.5, 3.0);
        REQUIRE(s.has_value());
        const double expect = 0.5 * img.at(1, 3) + 0.5 * img.at(2, 3);
        CHECK((*s)[0] == doctest::Approx(expect).epsilon(1e-15));
    }
}

TEST_CASE("bilinear_sample_grad value matches bilinear_sample bit for bit") {
    const ImageF img = testsupport::noise_image(12, 10, 3, 77);
    SplitmixRng rng(78);
    for (int trial = 0; trial < 300; ++trial) {
        const double u = rng.uniform(0.0, 11.0);
        const double v = rng.uniform(0.0, 9.0);
        const auto plain = bilinear_sample(img, u, v);
        const auto grad = bilinear_sample_grad(img, u, v);
        REQUIRE(plain.has_value());
        REQUIRE(grad.has_value());
        for (int c = 0; c < 3; ++c) CHECK((*plain)[c] == grad->value[c]);
    }
}

TEST_CASE("bilinear_sample_grad derivatives are exact on a linear ramp") {
    const ImageF img = ramp_image(16, 16);
    // Dyadic fractional parts keep every product in the derivative exact.
    for (const auto& [u, v] : {std::pair{3.5, 2.25}, {0.5, 0.5}, {10.75, 7.125}}) {
        const auto g = bilinear_sample_grad(img, u, v);
        REQUIRE(g.has_value());
        CHECK(g->du[0] == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(g->dv[0] == doctest::Approx(0.125).epsilon(1e-15));
    }
}

TEST_CASE("bilinear_sample_grad matches finite differences inside a cell") {
    const ImageF img = testsupport::noise_image(10, 8, 3, 91);
    SplitmixRng rng(92);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        // Keep the probe and both offsets inside the same bilinear cell:
        // the sampled surface is smooth only within a cell.
        const double u = rng.range(9) + rng.uniform(0.1, 0.9);
        const double v = rng.range(7) + rng.uniform(0.1, 0.9);
        const auto g = bilinear_sample_grad(img, u, v);
        const auto up = bilinear_sample(img, u + h, v);
        const auto um = bilinear_sample(img, u - h, v);
        const auto vp = bilinear_sample(img, u, v + h);
        const auto vm = bilinear_sample(img, u, v - h);
        REQUIRE(g.has_value());
        for (int c = 0; c < 3; ++c) {
            const double fd_u = ((*up)[c] - (*um)[c]) / (2.0 * h);
            const double fd_v = ((*vp)[c] - (*vm)[c]) / (2.0 * h);
            CHECK(g->du[c] == doctest::Approx(fd_u).epsilon(1e-6));
            CHECK(g->dv[c] == doctest::Approx(fd_v).epsilon(1e-6));
        }
    }
}

TEST_CASE("warp_image with an identity flow reproduces the reference") {
    const ImageF img = testsupport::noise_image(20, 15, 3, 33);
    PixelFlow flow(20, 15);
    for (int y = 0; y < 15; ++y) {
        for (int x = 0; x < 20; ++x) {
            const std::size_t i = flow.index(x, y);
            flow.u[i] = x;
            flow.v[i] = y;
            flow.valid.data()[i] = 1;
        }
    }
    const auto [warped, valid] = warp_image(img, flow);
    CHECK(warped == img);
    CHECK(valid.count_ones() == static_cast<std::size_t>(20 * 15));
}

TEST_CASE("warp_image leaves invalid pixels black and unmarked") {
    const ImageF img = testsupport::noise_image(8, 8, 1, 44);
    PixelFlow flow(8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const std::size_t i = flow.index(x, y);
            flow.u[i] = x;
            flow.v[i] = y;
            flow.valid.data()[i] = (x + y) % 2;
        }
    }
    const auto [warped, valid] = warp_image(img, flow);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            if ((x + y) % 2) {
                CHECK(valid.at(x, y) == 1);
                CHECK(warped.at(x, y) == img.at(x, y));
            } else {
                CHECK(valid.at(x, y) == 0);
                CHECK(warped.at(x, y) == 0.0f);
            }
        }
    }
}

TEST_CASE("warp_image rejects mismatched dimensions") {
    const ImageF img = testsupport::constant_image(8, 8, 1, 0.5f);
    PixelFlow flow(9, 8);
    CHECK_THROWS_AS(warp_image(img, flow), std::invalid_argument);
}

TEST_CASE("dilate_mask grows the zero region by a disk") {
    MaskImage mask(9, 9, 1);
    mask.at(4, 4) = 0;

    const MaskImage grown = dilate_mask(mask, 2);
    std::size_t zeros = 0;
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 9; ++x) {
            const int dx = x - 4, dy = y - 4;
            const bool in_disk = dx * dx + dy * dy <= 4;
            CHECK(grown.at(x, y) == (in_disk ? 0 : 1));
            zeros += grown.at(x, y) == 0;
        }
    }
    CHECK(zeros == 13);
}

TEST_CASE("dilate_mask clips the disk at image borders") {
    MaskImage mask(6, 6, 1);
    mask.at(0, 0) = 0;
    const MaskImage grown = dilate_mask(mask, 2);
    std::size_t zeros = 0;
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) zeros += grown.at(x, y) == 0;
    CHECK(zeros == 6);
    CHECK(grown.at(2, 0) == 0);
    CHECK(grown.at(0, 2) == 0);
    CHECK(grown.at(1, 1) == 0);
    CHECK(grown.at(2, 1) == 1);
}

TEST_CASE("dilate_mask edge cases") {
    MaskImage mask(7, 5, 1);
    mask.at(3, 2) = 0;

    SUBCASE("radius zero copies the input") {
        CHECK(dilate_mask(mask, 0) == mask);
    }
    SUBCASE("negative radius throws") {
        CHECK_THROWS_AS(dilate_mask(mask, -1), std::invalid_argument);
    }
    SUBCASE("all-known masks are unchanged") {
        const MaskImage ones(7, 5, 1);
        CHECK(dilate_mask(ones, 3) == ones);
    }
    SUBCASE("all-hole masks are unchanged") {
        const MaskImage zeros(7, 5, 0);
        CHECK(dilate_mask(zeros, 3) == zeros);
    }
}
