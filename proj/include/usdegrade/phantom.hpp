#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "usdegrade/image.hpp"

// Synthetic test objects. Sizes are arbitrary; geometry scales with the image.

namespace usdegrade::phantom {

/// Piecewise-constant B-mode-like phantom: tissue background, a bright inclusion, an
/// anechoic cyst and a bright layer. `variant` (0..4 give distinct layouts) shifts the
/// objects and intensities.
inline GrayImage piecewise_constant(std::size_t h, std::size_t w, unsigned variant = 0) {
    const double H = static_cast<double>(h);
    const double W = static_cast<double>(w);
    const double shift = 0.07 * static_cast<double>(variant % 5);
    const double background = 0.35 + 0.04 * static_cast<double>(variant % 3);
    Plane p(h, w, background);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double y = static_cast<double>(r) / H;
            const double x = static_cast<double>(c) / W;
            // bright layer
            if (y > 0.12 + shift / 2 && y < 0.20 + shift / 2) p(r, c) = 0.75;
            // bright elliptical inclusion
            const double ey = (y - (0.55 - shift / 3)) / 0.16;
            const double ex = (x - (0.30 + shift)) / 0.12;
            if (ey * ey + ex * ex < 1.0) p(r, c) = 0.8;
            // anechoic cyst
            const double cy = (y - 0.62) / 0.11;
            const double cx = (x - (0.72 - shift / 2)) / 0.11;
            if (cy * cy + cx * cx < 1.0) p(r, c) = 0.05;
            // small rectangular target
            if (y > 0.80 && y < 0.90 && x > 0.45 - shift && x < 0.58 - shift) p(r, c) = 0.6;
        }
    }
    return GrayImage(std::move(p));
}

/// Thin bright vertical bars on a dark background; profiles run along columns.
inline GrayImage bars(std::size_t h, std::size_t w, std::size_t bar_width = 2, std::size_t spacing = 16,
                      double bar = 0.9, double background = 0.05) {
    Plane p(h, w, background);
    for (std::size_t c = spacing / 2; c + bar_width <= w; c += spacing) {
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t k = 0; k < bar_width; ++k) p(r, c + k) = bar;
    }
    return GrayImage(std::move(p));
}

/// Smooth image in roughly [0.1, 0.9] built from low-frequency sinusoids and a blob.
inline GrayImage smooth(std::size_t h, std::size_t w) {
    Plane p(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double y = static_cast<double>(r) / static_cast<double>(h);
            const double x = static_cast<double>(c) / static_cast<double>(w);
            const double blob = std::exp(-((x - 0.6) * (x - 0.6) + (y - 0.4) * (y - 0.4)) / 0.05);
            p(r, c) = 0.5 + 0.2 * std::sin(2.0 * std::numbers::pi * x) * std::cos(std::numbers::pi * y) +
                      0.2 * blob - 0.1;
        }
    }
    return GrayImage(std::move(p));
}

}  // namespace usdegrade::phantom
