#pragma once

#include <stdexcept>

#include "usdegrade/image.hpp"
#include "usdegrade/random.hpp"

namespace usdegrade {

/// Adds i.i.d. N(0, sigma_g^2) per pixel (row-major draw order), then clips.
inline GrayImage add_gaussian_noise(const GrayImage& img, double sigma_g, RandomStream& rng) {
    if (!(sigma_g >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma_g must be >= 0");
    Plane out = img.plane();
    for (double& v : out) v += rng.normal(0.0, sigma_g);
    return GrayImage(std::move(out));
}

/// Multiplicative speckle: each pixel times n ~ Gamma(shape L, scale 1/L), i.e. mean 1 and
/// variance 1/L, then clipped. L is the equivalent number of looks.
inline GrayImage speckle(const GrayImage& img, double enl_looks, RandomStream& rng) {
    if (!(enl_looks >= 1.0)) throw std::invalid_argument("speckle: looks must be >= 1");
    Plane out = img.plane();
    const double scale = 1.0 / enl_looks;
    for (double& v : out) v *= rng.gamma(enl_looks, scale);
    return GrayImage(std::move(out));
}

}  // namespace usdegrade
