#include <gtest/gtest.h>

#include <map>

#include "usdegrade/degrade.hpp"
#include "usdegrade/metrics.hpp"
#include "usdegrade/phantom.hpp"

using namespace usdegrade;

TEST(DrawTraining, DeterministicPerSeed) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        RandomStream a(s, 4), b(s, 4);
        EXPECT_EQ(draw_training_degradation(a), draw_training_degradation(b));
    }
}

TEST(DrawTraining, FixedDrawCount) {
    // Every call consumes the same number of draws whatever fires, so later draws in a
    // stream never shift.
    std::map<std::uint64_t, int> counts;
    for (std::uint64_t s = 0; s < 200; ++s) {
        RandomStream r(s);
        const auto spec = draw_training_degradation(r);
        (void)spec;
        ++counts[r.counter()];
    }
    EXPECT_LE(counts.size(), 3u);  // Boost normal/gamma are not used here; uniform_int may reject
}

TEST(DrawTraining, Frequencies) {
    RandomStream r(2024);
    const int n = 100'000;
    int blur_noise = 0, light = 0, fourier = 0;
    std::map<std::size_t, int> ks;
    for (int i = 0; i < n; ++i) {
        const auto s = draw_training_degradation(r);
        blur_noise += s.applied_blur_noise;
        light += s.applied_light_path;
        fourier += s.noise.family == NoiseFamily::fourier;
        ++ks[s.blur_k];
        ASSERT_GE(s.noise.sigma_g, 0.05);
        ASSERT_LE(s.noise.sigma_g, 0.20);
        ASSERT_LE(s.noise.gamma_f, 0.2);
        ASSERT_LE(s.light_gamma_f, 0.2);
    }
    EXPECT_NEAR(blur_noise / double(n), 0.55, 0.01);
    EXPECT_NEAR(light / double(n), 0.45, 0.01);
    EXPECT_NEAR(fourier / double(n), 0.5, 0.01);
    ASSERT_EQ(ks.size(), 8u);
    for (auto [k, c] : ks) EXPECT_NEAR(c / double(n), 0.125, 0.015) << "k=" << k;
}

TEST(ApplyDegradation, BothPathsOffIsIdentity) {
    const GrayImage img = phantom::piecewise_constant(40, 40);
    DegradationSpec spec;
    spec.seed = 99;
    EXPECT_EQ(apply_degradation(img, spec), img);
}

TEST(ApplyDegradation, ZeroGaussianEqualsBlur) {
    const GrayImage img = phantom::piecewise_constant(40, 40);
    DegradationSpec spec;
    spec.applied_blur_noise = true;
    spec.blur_k = 9;
    spec.noise = {NoiseFamily::additive_gaussian, 0.0, 0.0, 1.0};
    EXPECT_EQ(apply_degradation(img, spec), blur(img, gaussian_kernel(9)));
}

TEST(ApplyDegradation, ReplaysBitExactly) {
    const GrayImage img = phantom::piecewise_constant(48, 40, 3);
    RandomStream r(5);
    for (int i = 0; i < 20; ++i) {
        const auto spec = draw_training_degradation(r);
        const GrayImage once = apply_degradation(img, spec);
        EXPECT_EQ(once, apply_degradation(img, spec));
        const DegradationSpec back = nlohmann::json(spec).get<DegradationSpec>();
        EXPECT_EQ(back, spec);
        EXPECT_EQ(apply_degradation(img, back), once);
    }
}

TEST(ApplyDegradation, InvalidSpecThrows) {
    DegradationSpec spec;
    spec.blur_k = 4;
    EXPECT_THROW(apply_degradation(GrayImage(8, 8), spec), std::invalid_argument);
}

TEST(SpecJson, SeedIsDecimalString) {
    DegradationSpec spec;
    spec.seed = 18446744073709551615ULL;
    const nlohmann::json j = spec;
    EXPECT_EQ(j.at("seed"), "18446744073709551615");
    EXPECT_EQ(j.get<DegradationSpec>().seed, spec.seed);
    EXPECT_THROW(parse_seed(nlohmann::json("12x")), std::invalid_argument);
    EXPECT_THROW(parse_seed(nlohmann::json("-1")), std::invalid_argument);
}

TEST(Stress, Degenerate) {
    const GrayImage img = phantom::smooth(32, 32);
    RandomStream r(1);
    const GrayImage a = stress_degradation(img, 0.0, std::nullopt, r);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(a.values()[i], img.values()[i], 1e-9);
    const GrayImage b = stress_degradation(img, 0.0, 7, r);
    const GrayImage ref = blur(img, gaussian_kernel(7));
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(b.values()[i], ref.values()[i], 1e-9);
}

TEST(Stress, StrongerGammaLowersPsnr) {
    const GrayImage img = phantom::smooth(32, 32);
    double p1 = 0, p2 = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        RandomStream a(s), b(s);
        p1 += psnr(img, stress_degradation(img, 0.1, 7, a));
        p2 += psnr(img, stress_degradation(img, 0.2, 7, b));
    }
    EXPECT_LT(p2, p1);
    RandomStream c(3), d(3);
    EXPECT_EQ(stress_degradation(img, 0.2, 7, c), stress_degradation(img, 0.2, 7, d));
}
