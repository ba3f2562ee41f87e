#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "usdegrade/random.hpp"

namespace usdegrade {

/// Dense row-major 2D array. No range invariant; see GrayImage for the clamped type.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), values_(height * width, fill) {}

    Raster(std::size_t height, std::size_t width, std::vector<T> values)
        : height_(height), width_(width), values_(std::move(values)) {
        if (values_.size() != height_ * width_) {
            throw std::invalid_argument("Raster: data length " + std::to_string(values_.size()) +
                                        " does not match " + std::to_string(height_) + "x" +
                                        std::to_string(width_));
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * width_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * width_ + c]; }

    std::span<T> data() noexcept { return values_; }
    std::span<const T> data() const noexcept { return values_; }

    std::span<T> row(std::size_t r) noexcept { return {values_.data() + r * width_, width_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {values_.data() + r * width_, width_}; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> values_;
};

using Plane = Raster<double>;
using Spectrum = Raster<std::complex<double>>;

/// Clamp into [0,1]; NaN maps to 0.
inline double clamp_unit(double v) noexcept {
    if (!(v > 0.0)) return 0.0;
    return v < 1.0 ? v : 1.0;
}

/// Grayscale image with every intensity in [0,1]. Construction and mutation clamp.
class GrayImage {
public:
    GrayImage(std::size_t height, std::size_t width, double fill = 0.0)
        : plane_(checked_dims(height, width), width, clamp_unit(fill)) {}

    GrayImage(std::size_t height, std::size_t width, std::vector<double> values)
        : plane_(checked_dims(height, width), width, std::move(values)) {
        clamp_all();
    }

    explicit GrayImage(Plane plane) : plane_(std::move(plane)) {
        checked_dims(plane_.height(), plane_.width());
        clamp_all();
    }

    std::size_t height() const noexcept { return plane_.height(); }
    std::size_t width() const noexcept { return plane_.width(); }
    std::size_t size() const noexcept { return plane_.size(); }

    double operator()(std::size_t r, std::size_t c) const noexcept { return plane_(r, c); }
    void set(std::size_t r, std::size_t c, double v) noexcept { plane_(r, c) = clamp_unit(v); }

    const Plane& plane() const noexcept { return plane_; }
    std::span<const double> values() const& noexcept { return plane_.data(); }
    std::span<const double> values() const&& = delete;  // would dangle

    double mean() const noexcept {
        return std::accumulate(plane_.begin(), plane_.end(), 0.0) / static_cast<double>(size());
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    static std::size_t checked_dims(std::size_t height, std::size_t width) {
        if (height == 0 || width == 0) {
            throw std::invalid_argument("GrayImage: dimensions must be at least 1x1");
        }
        return height;
    }

    void clamp_all() noexcept {
        for (double& v : plane_) v = clamp_unit(v);
    }

    Plane plane_;
};

inline GrayImage clip_unit(const Plane& plane) { return GrayImage(plane); }
inline GrayImage clip_unit(const GrayImage& img) { return img; }

namespace detail {

// Bilinear sample with the lerp form a + t*(b-a), which reproduces constants exactly.
// (y, x) must already lie in [0, h-1] x [0, w-1].
inline double bilinear_at(const Plane& src, double y, double x) noexcept {
    const std::size_t h = src.height();
    const std::size_t w = src.width();
    auto y0 = static_cast<std::size_t>(std::floor(y));
    auto x0 = static_cast<std::size_t>(std::floor(x));
    y0 = std::min(y0, h - 1);
    x0 = std::min(x0, w - 1);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const std::size_t x1 = std::min(x0 + 1, w - 1);
    const double fy = y - static_cast<double>(y0);
    const double fx = x - static_cast<double>(x0);
    const double top = src(y0, x0) + fx * (src(y0, x1) - src(y0, x0));
    const double bot = src(y1, x0) + fx * (src(y1, x1) - src(y1, x0));
    return top + fy * (bot - top);
}

}  // namespace detail

/// Bilinear resize with half-pixel (align-corners=false) coordinates; edge samples clamp.
inline GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw std::invalid_argument("resize_bilinear: target dimensions must be positive");
    }
    if (out_h == img.height() && out_w == img.width()) return img;

    const Plane& src = img.plane();
    const double sy = static_cast<double>(img.height()) / static_cast<double>(out_h);
    const double sx = static_cast<double>(img.width()) / static_cast<double>(out_w);
    const double ymax = static_cast<double>(img.height() - 1);
    const double xmax = static_cast<double>(img.width() - 1);

    Plane out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        const double y = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, ymax);
        for (std::size_t c = 0; c < out_w; ++c) {
            const double x = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, xmax);
            out(r, c) = detail::bilinear_at(src, y, x);
        }
    }
    return GrayImage(std::move(out));
}

/// Rotate about the geometric centre ((H-1)/2, (W-1)/2). Positive angles turn the content
/// counter-clockwise as displayed (rows growing downward). Inverse-mapped bilinear sampling;
/// samples whose source falls outside the image are 0.
inline GrayImage rotate(const GrayImage& img, double degrees) {
    if (degrees == 0.0) return img;

    const Plane& src = img.plane();
    const double theta = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
    const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
    const double ymax = static_cast<double>(img.height() - 1);
    const double xmax = static_cast<double>(img.width() - 1);
    constexpr double slack = 1e-9;

    Plane out(img.height(), img.width(), 0.0);
    for (std::size_t r = 0; r < img.height(); ++r) {
        const double dy = static_cast<double>(r) - cy;
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double dx = static_cast<double>(c) - cx;
            const double xs = cs * dx - sn * dy + cx;
            const double ys = sn * dx + cs * dy + cy;
            if (ys < -slack || ys > ymax + slack || xs < -slack || xs > xmax + slack) continue;
            out(r, c) = detail::bilinear_at(src, std::clamp(ys, 0.0, ymax), std::clamp(xs, 0.0, xmax));
        }
    }
    return GrayImage(std::move(out));
}

struct PixelPos {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

struct Extent {
    std::size_t height = 0;
    std::size_t width = 0;
};

inline GrayImage crop(const GrayImage& img, PixelPos origin, Extent size) {
    if (size.height == 0 || size.width == 0 || origin.row + size.height > img.height() ||
        origin.col + size.width > img.width()) {
        throw std::invalid_argument("crop: rectangle (" + std::to_string(origin.row) + "," +
                                    std::to_string(origin.col) + ") + " + std::to_string(size.height) +
                                    "x" + std::to_string(size.width) + " exceeds " +
                                    std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
    Plane out(size.height, size.width);
    for (std::size_t r = 0; r < size.height; ++r) {
        auto src = img.plane().row(origin.row + r).subspan(origin.col, size.width);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return GrayImage(std::move(out));
}

/// Geometric augmentation: square resize, in-plane rotation, then a square crop.
struct AugmentSpec {
    std::size_t target_resize = 128;
    double rotation_degrees = 0.0;
    std::size_t crop_size = 64;
    PixelPos crop_origin{};

    static constexpr double max_rotation_degrees = 15.0;

    void validate() const {
        if (target_resize == 0 || crop_size == 0) {
            throw std::invalid_argument("AugmentSpec: resize and crop sizes must be positive");
        }
        if (!(std::abs(rotation_degrees) <= max_rotation_degrees)) {
            throw std::invalid_argument("AugmentSpec: |rotation| must be <= 15 degrees");
        }
        if (crop_origin.row + crop_size > target_resize || crop_origin.col + crop_size > target_resize) {
            throw std::invalid_argument("AugmentSpec: crop window exceeds the resized image");
        }
    }
};

/// Draws rotation ~ U[-15, 15] degrees and a crop origin uniform over all valid origins.
inline AugmentSpec draw_augment_spec(RandomStream& rng, std::size_t target_resize = 128,
                                     std::size_t crop_size = 64) {
    if (crop_size == 0 || crop_size > target_resize) {
        throw std::invalid_argument("draw_augment_spec: crop must fit inside the resized image");
    }
    AugmentSpec spec;
    spec.target_resize = target_resize;
    spec.crop_size = crop_size;
    spec.rotation_degrees =
        rng.uniform(-AugmentSpec::max_rotation_degrees, AugmentSpec::max_rotation_degrees);
    const auto span = static_cast<std::int64_t>(target_resize - crop_size);
    spec.crop_origin.row = static_cast<std::size_t>(rng.uniform_int(0, span));
    spec.crop_origin.col = static_cast<std::size_t>(rng.uniform_int(0, span));
    return spec;
}

inline GrayImage augment_patch(const GrayImage& img, const AugmentSpec& spec) {
    spec.validate();
    GrayImage resized = resize_bilinear(img, spec.target_resize, spec.target_resize);
    GrayImage rotated = rotate(resized, spec.rotation_degrees);
    return crop(rotated, spec.crop_origin, {spec.crop_size, spec.crop_size});
}

}  // namespace usdegrade
