#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "usdegrade/image.hpp"
#include "usdegrade/phantom.hpp"
#include "usdegrade/random.hpp"

using namespace usdegrade;

TEST(GrayImage, ClampsOnConstruction) {
    GrayImage img(1, 3, std::vector<double>{-0.2, 1.7, 0.5});
    EXPECT_EQ(img(0, 0), 0.0);
    EXPECT_EQ(img(0, 1), 1.0);
    EXPECT_EQ(img(0, 2), 0.5);
}

TEST(GrayImage, RejectsEmpty) {
    EXPECT_THROW(GrayImage(0, 4), std::invalid_argument);
    EXPECT_THROW(GrayImage(4, 0), std::invalid_argument);
}

TEST(GrayImage, NanBecomesZero) {
    GrayImage img(1, 1, std::vector<double>{std::nan("")});
    EXPECT_EQ(img(0, 0), 0.0);
}

TEST(ClipUnit, PlaneValues) {
    Plane p(1, 3);
    p(0, 0) = -0.2;
    p(0, 1) = 1.7;
    p(0, 2) = 0.5;
    const GrayImage out = clip_unit(p);
    EXPECT_EQ(out(0, 0), 0.0);
    EXPECT_EQ(out(0, 1), 1.0);
    EXPECT_EQ(out(0, 2), 0.5);
}

TEST(Resize, ConstantStaysConstant) {
    const GrayImage img(13, 7, 0.5);
    for (auto [h, w] : {std::pair{5, 9}, {32, 32}, {1, 1}, {40, 3}}) {
        const GrayImage out = resize_bilinear(img, h, w);
        for (double v : out.values()) EXPECT_EQ(v, 0.5);
    }
}

TEST(Resize, SameSizeIsIdentity) {
    std::mt19937_64 gen(3);
    const GrayImage img = oracle::random_image(9, 11, gen);
    EXPECT_EQ(resize_bilinear(img, 9, 11), img);
}

TEST(Resize, CheckerboardHandValues) {
    const GrayImage img(2, 2, std::vector<double>{0, 1, 1, 0});
    const GrayImage out = resize_bilinear(img, 4, 4);
    const double expected[4][4] = {{0, .25, .75, 1}, {.25, .375, .625, .75}, {.75, .625, .375, .25}, {1, .75, .25, 0}};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out(r, c), expected[r][c], 1e-15) << r << "," << c;
}

TEST(Resize, RejectsZeroTarget) { EXPECT_THROW(resize_bilinear(GrayImage(2, 2), 0, 3), std::invalid_argument); }

TEST(Rotate, ZeroIsIdentity) {
    std::mt19937_64 gen(5);
    const GrayImage img = oracle::random_image(10, 12, gen);
    EXPECT_EQ(rotate(img, 0.0), img);
}

TEST(Rotate, RoundTripSmoothImage) {
    const GrayImage img = phantom::smooth(96, 96);
    const GrayImage back = rotate(rotate(img, 10.0), -10.0);
    double err = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 24; r < 72; ++r)
        for (std::size_t c = 24; c < 72; ++c, ++n) err += std::abs(back(r, c) - img(r, c));
    EXPECT_LT(err / static_cast<double>(n), 0.02);
}

TEST(Rotate, ConstantInteriorPreserved) {
    const GrayImage out = rotate(GrayImage(64, 64, 1.0), 15.0);
    const std::size_t margin = static_cast<std::size_t>(0.3 * 64);
    for (std::size_t r = 32 - margin; r <= 32 + margin - 1; ++r)
        for (std::size_t c = 32 - margin; c <= 32 + margin - 1; ++c) EXPECT_EQ(out(r, c), 1.0);
    EXPECT_EQ(out(0, 0), 0.0);
}

TEST(Rotate, PositiveAngleIsCounterClockwise) {
    // A bright pixel right of centre moves up (smaller row) for +90 degrees.
    GrayImage img(9, 9, 0.0);
    img.set(4, 7, 1.0);
    const GrayImage out = rotate(img, 90.0);
    EXPECT_NEAR(out(1, 4), 1.0, 1e-9);
}

TEST(Crop, FullAndSingle) {
    std::mt19937_64 gen(7);
    const GrayImage img = oracle::random_image(6, 5, gen);
    EXPECT_EQ(crop(img, {0, 0}, {6, 5}), img);
    const GrayImage one = crop(img, {3, 2}, {1, 1});
    EXPECT_EQ(one(0, 0), img(3, 2));
}

TEST(Crop, CenterQuadrant) {
    std::mt19937_64 gen(8);
    const GrayImage img = oracle::random_image(128, 128, gen);
    const GrayImage out = crop(img, {32, 32}, {64, 64});
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 64; ++c) ASSERT_EQ(out(r, c), img(r + 32, c + 32));
}

TEST(Crop, OutOfBoundsThrows) {
    EXPECT_THROW(crop(GrayImage(4, 4), {2, 0}, {3, 1}), std::invalid_argument);
    EXPECT_THROW(crop(GrayImage(4, 4), {0, 0}, {0, 1}), std::invalid_argument);
}

TEST(Augment, ZeroRotationIsCenterCrop) {
    std::mt19937_64 gen(9);
    const GrayImage img = oracle::random_image(128, 128, gen);
    const AugmentSpec spec{128, 0.0, 64, {32, 32}};
    EXPECT_EQ(augment_patch(img, spec), crop(img, {32, 32}, {64, 64}));
}

TEST(Augment, DrawnSpecDeterministicAndShaped) {
    const GrayImage img = phantom::piecewise_constant(100, 140, 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream a(seed), b(seed);
        const AugmentSpec sa = draw_augment_spec(a);
        const AugmentSpec sb = draw_augment_spec(b);
        EXPECT_EQ(sa.rotation_degrees, sb.rotation_degrees);
        EXPECT_LE(std::abs(sa.rotation_degrees), 15.0);
        EXPECT_LE(sa.crop_origin.row, 64u);
        EXPECT_LE(sa.crop_origin.col, 64u);
        const GrayImage p1 = augment_patch(img, sa);
        EXPECT_EQ(p1, augment_patch(img, sb));
        EXPECT_EQ(p1.height(), 64u);
        EXPECT_EQ(p1.width(), 64u);
    }
}

TEST(Augment, InvalidSpecThrows) {
    EXPECT_THROW(augment_patch(GrayImage(8, 8), AugmentSpec{128, 20.0, 64, {0, 0}}), std::invalid_argument);
    EXPECT_THROW(augment_patch(GrayImage(8, 8), AugmentSpec{128, 0.0, 64, {65, 0}}), std::invalid_argument);
}

TEST(ImageProperties, RangeClosure) {
    std::mt19937_64 gen(10);
    for (int t = 0; t < 20; ++t) {
        const GrayImage img = oracle::random_image(17, 23, gen);
        for (const GrayImage& out : {resize_bilinear(img, 31, 9), rotate(img, 7.5 * t - 70), crop(img, {3, 4}, {5, 6})})
            for (double v : out.values()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    }
}
