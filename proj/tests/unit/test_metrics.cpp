#include "oracles.hpp"

#include "rara/errors.hpp"
#include "rara/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rara;

namespace {

Image noise_image(int w, int h, std::uint64_t seed) {
    oracle::Sampler rng(seed);
    Image img(w, h);
    for (auto& p : img.pixels()) {
        p = Eigen::Vector3f(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
    }
    return img;
}

} // namespace

TEST(L1, Examples) {
    const Image black(20, 10, {0, 0, 0}), white(20, 10, {1, 1, 1});
    EXPECT_EQ(l1_error(black, black), 0.0);
    EXPECT_DOUBLE_EQ(l1_error(black, white), 255.0);
    EXPECT_THROW(l1_error(black, Image(10, 20)), ParameterError);
}

TEST(L1, MatchesNaiveLoop) {
    const Image a = noise_image(31, 17, 1), b = noise_image(31, 17, 2);
    double sum = 0.0;
    for (int y = 0; y < 17; ++y) {
        for (int x = 0; x < 31; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double va = std::clamp<double>(a.at(x, y)[c], 0, 1) * 255.0;
                const double vb = std::clamp<double>(b.at(x, y)[c], 0, 1) * 255.0;
                sum += std::abs(va - vb);
            }
        }
    }
    EXPECT_NEAR(l1_error(a, b), sum / (31 * 17 * 3), 1e-9);
    EXPECT_EQ(l1_error(a, b), l1_error(b, a));
}

TEST(Ssim, IdenticalIsExactlyOne) {
    const Image a = noise_image(40, 30, 3);
    EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, SymmetricAndBelowOne) {
    const Image a = noise_image(40, 30, 3), b = noise_image(40, 30, 4);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_LT(ssim(a, b), 0.5);
}

TEST(Ssim, ConstantImagesClosedForm) {
    // With zero variance SSIM reduces to the luminance term.
    const Image a(16, 16, {0.2f, 0.2f, 0.2f}), b(16, 16, {0.6f, 0.6f, 0.6f});
    const double ma = luma601({0.2f, 0.2f, 0.2f}), mb = luma601({0.6f, 0.6f, 0.6f});
    const double c1 = std::pow(kSsimK1 * kSsimRange, 2);
    EXPECT_NEAR(ssim(a, b), (2 * ma * mb + c1) / (ma * ma + mb * mb + c1), 1e-9);
}

TEST(Ssim, RejectsSmallOrMismatched) {
    EXPECT_THROW(ssim(Image(10, 40), Image(10, 40)), ParameterError);
    EXPECT_THROW(ssim(Image(20, 20), Image(20, 21)), ParameterError);
}

TEST(Luma, Rec601Weights) {
    EXPECT_NEAR(luma601({1, 0, 0}), 0.299 * 255, 1e-4);
    EXPECT_NEAR(luma601({0, 1, 0}), 0.587 * 255, 1e-4);
    EXPECT_NEAR(luma601({0, 0, 1}), 0.114 * 255, 1e-4);
}

TEST(Ablation, ClassBasedIsLosslessNaiveIsNot) {
    const Scene s = generate_synthetic(ClusterSpec{300, 3, 0.02, 0.2, 1.0, 0.8});
    const Camera cam = Camera::fit_bounds(s.bounds(), 96, 96);
    const auto rows = run_ablation(s, cam);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].mode_compared, "wo RaRa");
    EXPECT_GT(rows[0].l1, 0.0);
    EXPECT_LT(rows[0].ssim, 1.0);
    EXPECT_EQ(rows[1].mode_compared, "w RaRa");
    EXPECT_EQ(rows[1].l1, 0.0);
    EXPECT_EQ(rows[1].ssim, 1.0);
    const std::string table = format_ablation_table(rows, s.name());
    EXPECT_NE(table.find("wo RaRa"), std::string::npos);
}

TEST(Ablation, PlaneBeyondBoundsLeavesEverythingVisible) {
    const Scene s = generate_synthetic(StrandSpec{});
    for (const Eigen::Vector3d n : {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(-1, 2, 0.5)}) {
        const ClipPlane p = plane_beyond_bounds(s.bounds(), n);
        for (const auto& g : s.gaussians()) {
            ASSERT_EQ(classify(g, p), VisibilityClass::Visible);
        }
    }
}

TEST(Sweep, OffsetsSpanTheBounds) {
    const Bounds b{{-1, -2, -3}, {1, 2, 3}};
    const auto offs = sweep_offsets(b, {1, 0, 0}, 5);
    ASSERT_EQ(offs.size(), 5u);
    // Start: every point of the box is on the visible side. End: none is.
    EXPECT_GT(-1.0 + offs.front(), 0.0);
    EXPECT_LT(1.0 + offs.back(), 0.0);
    for (std::size_t i = 1; i < offs.size(); ++i) {
        EXPECT_LT(offs[i], offs[i - 1]);
    }
    EXPECT_THROW(sweep_offsets(b, {1, 0, 0}, 0), ParameterError);
}

TEST(Sweep, SingleFrameStatsCoincide) {
    const Scene s = generate_synthetic(GridSpec{});
    const Camera cam = Camera::fit_bounds(s.bounds(), 32, 32);
    const auto r = run_sweep_bench(s, cam, ClipMode::RaRa, 1);
    EXPECT_EQ(r.frames, 1);
    EXPECT_EQ(r.min_fps, r.mean_fps);
    EXPECT_EQ(r.max_fps, r.mean_fps);
    EXPECT_GT(r.mean_fps, 0.0);
    const auto j = to_json(r);
    EXPECT_EQ(j.at("mode"), "rara");
}

TEST(Sweep, StatsOrdered) {
    const Scene s = generate_synthetic(GridSpec{});
    const Camera cam = Camera::fit_bounds(s.bounds(), 32, 32);
    const auto r = run_sweep_bench(s, cam, ClipMode::Hard, 6);
    EXPECT_EQ(r.frame_ms.size(), 6u);
    EXPECT_LE(r.min_fps, r.mean_fps);
    EXPECT_LE(r.mean_fps, r.max_fps);
}
