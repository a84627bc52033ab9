#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "refill3d/align2d.hpp"

#include "refill3d/sampler.hpp"
#include "refill3d/serialization.hpp"
#include "refill3d/synth.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace refill3d;

namespace {

// Smooth band-limited texture; white noise defeats subpixel registration.
ImageF textured_frame(std::uint64_t seed, int size) {
    SplitmixRng rng(seed);
    const PlaneScene scene = random_scene(rng);
    const Intrinsics k = default_intrinsics(size, size, 2.0 * size);
    return render(scene, Pose6D::identity(), k, size, size).image;
}

// Hole mask plus the target with hole pixels blanked.
struct MaskedTarget {
    MaskImage known;
    ImageF target;
};

MaskedTarget mask_out(const ImageF& truth, double fraction, std::uint64_t seed) {
    SplitmixRng rng(seed);
    MaskedTarget mt{random_hole_mask(truth.width(), truth.height(), fraction, rng),
                    truth};
    for (int y = 0; y < truth.height(); ++y)
        for (int x = 0; x < truth.width(); ++x)
            if (!mt.known.at(x, y))
                for (int c = 0; c < truth.channels(); ++c)
                    mt.target.at(x, y, c) = 0.0f;
    return mt;
}

}  // namespace

TEST_CASE("apply_se2 matches the hand-computed quarter turn") {
    const ScaledEuclidean2D t{M_PI / 2.0, 1.0, 0.0, 2.0};
    const auto p = apply_se2(t, 1.0, 0.0);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("apply_se2 identity is a passthrough") {
    const auto p = apply_se2(ScaledEuclidean2D::identity(), 3.25, -1.5);
    CHECK(p[0] == 3.25);
    CHECK(p[1] == -1.5);
}

TEST_CASE("ScaledEuclidean2D inverse") {
    SUBCASE("matches the hand-computed values") {
        const ScaledEuclidean2D t{0.3, 2.0, -1.0, 1.2};
        const ScaledEuclidean2D inv = t.inverse();
        CHECK(inv.theta == doctest::Approx(-0.3).epsilon(1e-15));
        CHECK(inv.s == doctest::Approx(0.8333333333333334).epsilon(1e-15));
        CHECK(inv.tx == doctest::Approx(-1.3459606429915603).epsilon(1e-12));
        CHECK(inv.ty == doctest::Approx(1.2886474187069041).epsilon(1e-12));
    }
    SUBCASE("identity inverts to itself") {
        CHECK(ScaledEuclidean2D::identity().inverse() ==
              ScaledEuclidean2D::identity());
    }
    SUBCASE("round-trips arbitrary points") {
        SplitmixRng rng(30);
        for (int i = 0; i < 100; ++i) {
            const ScaledEuclidean2D t{rng.signed_range(0.0, 1.5),
                                      rng.signed_range(0.0, 20.0),
                                      rng.signed_range(0.0, 20.0),
                                      rng.uniform(0.3, 3.0)};
            const double u = rng.signed_range(0.0, 50.0);
            const double v = rng.signed_range(0.0, 50.0);
            const auto fwd = apply_se2(t, u, v);
            const auto back = apply_se2(t.inverse(), fwd[0], fwd[1]);
            CHECK(back[0] == doctest::Approx(u).epsilon(1e-9));
            CHECK(back[1] == doctest::Approx(v).epsilon(1e-9));
        }
    }
}

TEST_CASE("resample_se2 identity returns bit-exact copies") {
    const ImageF img = testsupport::noise_image(17, 13, 3, 50);
    MaskImage valid(17, 13, 1);
    valid.at(5, 7) = 0;

    const auto [out, out_valid] = resample_se2(img, valid, ScaledEuclidean2D::identity());
    for (int y = 0; y < 13; ++y) {
        for (int x = 0; x < 17; ++x) {
            CHECK(out_valid.at(x, y) == valid.at(x, y));
            if (out_valid.at(x, y))
                for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == img.at(x, y, c));
        }
    }
}

TEST_CASE("resample_se2 shifts content by integer translations") {
    const ImageF img = testsupport::noise_image(16, 16, 1, 51);
    const MaskImage valid(16, 16, 1);
    const ScaledEuclidean2D t{0.0, 3.0, 2.0, 1.0};

    const auto [out, out_valid] = resample_se2(img, valid, t);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            const bool inside = x >= 3 && y >= 2;
            CHECK(out_valid.at(x, y) == (inside ? 1 : 0));
            if (inside) CHECK(out.at(x, y) == img.at(x - 3, y - 2));
        }
    }
}

TEST_CASE("resample_se2 rejects mismatched mask sizes") {
    const ImageF img = testsupport::constant_image(8, 8, 1, 0.5f);
    const MaskImage wrong(8, 7, 1);
    CHECK_THROWS_AS(resample_se2(img, wrong, ScaledEuclidean2D::identity()),
                    std::invalid_argument);
}

TEST_CASE("default_dilation_radius scales with the shorter side") {
    CHECK(default_dilation_radius(512, 512) == 15);
    CHECK(default_dilation_radius(256, 256) == 8);
    CHECK(default_dilation_radius(100, 200) == 3);
    CHECK(default_dilation_radius(200, 100) == 3);
}

TEST_CASE("ring_loss_2d on constant images matches the smoothed-L1 value") {
    const int n = 24;
    MaskImage known(n, n, 1);
    for (int y = 9; y < 15; ++y)
        for (int x = 9; x < 15; ++x) known.at(x, y) = 0;
    const MaskImage dilated = dilate_mask(known, 2);
    const ImageF target = testsupport::constant_image(n, n, 3, 0.5f);
    const MaskImage all_valid(n, n, 1);

    SUBCASE("uniform offset gives the per-pixel smoothed-L1 of the offset") {
        const ImageF coarse = testsupport::constant_image(n, n, 3, 0.75f);
        const double loss = ring_loss_2d(ScaledEuclidean2D::identity(), target,
                                         known, dilated, coarse, all_valid);
        CHECK(loss == doctest::Approx(0.24900199999200007).epsilon(1e-12));
    }
    SUBCASE("matching images give exactly zero") {
        CHECK(ring_loss_2d(ScaledEuclidean2D::identity(), target, known, dilated,
                           target, all_valid) == 0.0);
    }
    SUBCASE("an empty ring yields infinity") {
        CHECK(std::isinf(ring_loss_2d(ScaledEuclidean2D::identity(), target,
                                      known, known, target, all_valid)));
    }
    SUBCASE("a fully invalid coarse image yields infinity") {
        const MaskImage none(n, n, 0);
        CHECK(std::isinf(ring_loss_2d(ScaledEuclidean2D::identity(), target,
                                      known, dilated, target, none)));
    }
    SUBCASE("an all-known mask has no ring") {
        const MaskImage full(n, n, 1);
        CHECK(std::isinf(ring_loss_2d(ScaledEuclidean2D::identity(), target,
                                      full, dilate_mask(full, 2), target,
                                      all_valid)));
    }
    SUBCASE("mask size mismatch throws") {
        const MaskImage wrong(n, n - 1, 1);
        CHECK_THROWS_AS(ring_loss_2d(ScaledEuclidean2D::identity(), target,
                                     known, wrong, target, all_valid),
                        std::invalid_argument);
    }
}

TEST_CASE("ring_loss_grad_2d matches central finite differences") {
    const int n = 96;
    const ImageF truth = textured_frame(60, n);
    const MaskedTarget mt = mask_out(truth, 0.10, 61);
    const MaskImage dilated = dilate_mask(mt.known, 4);
    const ScaledEuclidean2D residual{0.01, 1.3, -0.7, 1.015};
    const auto [coarse, coarse_valid] =
        resample_se2(truth, MaskImage(n, n, 1), residual);

    const double h = 1e-8;
    SplitmixRng rng(62);
    int passes = 0;
    for (int trial = 0; trial < 12; ++trial) {
        ScaledEuclidean2D t;
        t.theta = rng.signed_range(0.0, 0.05);
        t.tx = rng.signed_range(0.0, 2.0) + 0.37;
        t.ty = rng.signed_range(0.0, 2.0) - 0.21;
        t.s = 1.0 + rng.signed_range(0.0, 0.03);

        std::array<double, 4> fd{};
        for (int j = 0; j < 4; ++j) {
            ScaledEuclidean2D plus = t, minus = t;
            double* fields[4] = {&plus.theta, &plus.tx, &plus.ty, &plus.s};
            double* fieldsm[4] = {&minus.theta, &minus.tx, &minus.ty, &minus.s};
            *fields[j] += h;
            *fieldsm[j] -= h;
            const double lp = ring_loss_2d(plus, mt.target, mt.known, dilated,
                                           coarse, coarse_valid);
            const double lm = ring_loss_2d(minus, mt.target, mt.known, dilated,
                                           coarse, coarse_valid);
            fd[j] = (lp - lm) / (2.0 * h);
        }
        const auto an = ring_loss_grad_2d(t, mt.target, mt.known, dilated,
                                          coarse, coarse_valid);
        double worst = 0.0, scale = 1e-6;
        for (int j = 0; j < 4; ++j) {
            worst = std::max(worst, std::abs(fd[j] - an[j]));
            scale = std::max(scale, std::abs(an[j]));
        }
        if (worst / scale < 1e-4) ++passes;
    }
    // A wrong gradient fails every probe; the slack only absorbs the rare
    // finite-difference step that straddles a bilinear cell boundary.
    CHECK(passes >= 10);
}

TEST_CASE("align_2d recovers an injected residual transform") {
    const int n = 128;
    const ImageF truth = textured_frame(63, n);
    const MaskedTarget mt = mask_out(truth, 0.10, 64);
    const ScaledEuclidean2D residual{1.0 * M_PI / 180.0, 2.0, -1.5, 1.02};
    const auto [coarse, coarse_valid] =
        resample_se2(truth, MaskImage(n, n, 1), residual);

    const MaskImage dilated =
        dilate_mask(mt.known, default_dilation_radius(n, n));
    const double initial = ring_loss_2d(ScaledEuclidean2D::identity(), mt.target,
                                        mt.known, dilated, coarse, coarse_valid);

    std::vector<double> history;
    const Align2DResult res =
        align_2d(mt.target, mt.known, coarse, coarse_valid, {}, &history);

    CHECK(!res.refinement_skipped);
    CHECK(res.iterations > 0);
    CHECK(res.final_loss < 0.5 * initial);

    // The recovered transform must undo the residual: mapping a ring pixel
    // through the residual and then the result should land back on itself.
    double err_sum = 0.0;
    long count = 0;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (!mt.known.at(x, y) || dilated.at(x, y)) continue;
            const auto mid = apply_se2(residual, x, y);
            const auto back = apply_se2(res.transform, mid[0], mid[1]);
            err_sum += std::hypot(back[0] - x, back[1] - y);
            ++count;
        }
    }
    REQUIRE(count > 0);
    CHECK(err_sum / count < 0.5);

    SUBCASE("loss history is monotone") {
        REQUIRE(!history.empty());
        for (std::size_t i = 1; i < history.size(); ++i)
            CHECK(history[i] <= history[i - 1]);
    }
    SUBCASE("the fine image is the coarse image resampled by the transform") {
        const auto [expect, expect_valid] =
            resample_se2(coarse, coarse_valid, res.transform);
        CHECK(testsupport::max_abs_diff(res.fine, expect) == 0.0f);
        CHECK(res.valid.data() == expect_valid.data());
    }
}

TEST_CASE("align_2d passes through when nothing can improve") {
    const int n = 64;
    const ImageF truth = textured_frame(65, n);
    const MaskedTarget mt = mask_out(truth, 0.10, 66);

    SUBCASE("fully invalid coarse input is flagged as skipped") {
        const MaskImage none(n, n, 0);
        const Align2DResult res = align_2d(mt.target, mt.known, truth, none);
        CHECK(res.refinement_skipped);
        CHECK(res.transform == ScaledEuclidean2D::identity());
        CHECK(std::isinf(res.final_loss));
        CHECK(testsupport::max_abs_diff(res.fine, truth) == 0.0f);
        CHECK(res.valid.data() == none.data());
    }
    SUBCASE("an all-known mask has no ring to fit") {
        const MaskImage full(n, n, 1);
        const Align2DResult res =
            align_2d(truth, full, truth, MaskImage(n, n, 1));
        CHECK(res.refinement_skipped);
        CHECK(res.transform == ScaledEuclidean2D::identity());
    }
    SUBCASE("a perfect coarse image stays untouched") {
        const Align2DResult res =
            align_2d(mt.target, mt.known, truth, MaskImage(n, n, 1));
        CHECK(!res.refinement_skipped);
        CHECK(res.iterations == 0);
        CHECK(res.transform == ScaledEuclidean2D::identity());
        CHECK(res.final_loss == 0.0);
        CHECK(testsupport::max_abs_diff(res.fine, truth) == 0.0f);
    }
}

TEST_CASE("align_2d rejects mismatched inputs") {
    const ImageF a = testsupport::constant_image(16, 16, 3, 0.5f);
    const ImageF b = testsupport::constant_image(16, 15, 3, 0.5f);
    const MaskImage m16(16, 16, 1);
    const MaskImage m15(16, 15, 1);
    CHECK_THROWS_AS(align_2d(a, m16, b, m15), std::invalid_argument);
    CHECK_THROWS_AS(align_2d(a, m15, a, m16), std::invalid_argument);
}

TEST_CASE("ScaledEuclidean2D serializes with stable field names") {
    const ScaledEuclidean2D t{0.25, -3.5, 2.0, 1.1};
    const nlohmann::json j = t;
    CHECK(j.at("theta") == 0.25);
    CHECK(j.at("tx") == -3.5);
    CHECK(j.at("ty") == 2.0);
    CHECK(j.at("s") == 1.1);
    CHECK(j.get<ScaledEuclidean2D>() == t);
}
