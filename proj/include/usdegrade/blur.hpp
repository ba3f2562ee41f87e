#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "usdegrade/image.hpp"

namespace usdegrade {

/// Isotropic Gaussian point-spread surrogate. The 2D taps are the outer product of a
/// normalised 1D profile, so they sum to one and have the full 8-fold symmetry.
class BlurKernel {
public:
    std::size_t size() const noexcept { return profile_.size(); }
    double sigma() const noexcept { return sigma_; }
    std::size_t radius() const noexcept { return size() / 2; }

    /// Separable 1D factor, length size().
    const std::vector<double>& profile() const noexcept { return profile_; }

    /// 2D tap at (u, v) with u, v in [0, size).
    double tap(std::size_t u, std::size_t v) const noexcept { return profile_[u] * profile_[v]; }

    Plane taps() const {
        Plane t(size(), size());
        for (std::size_t u = 0; u < size(); ++u)
            for (std::size_t v = 0; v < size(); ++v) t(u, v) = tap(u, v);
        return t;
    }

    /// Builds a kernel of odd size k with the given sigma; k == 1 is the identity.
    static BlurKernel make(std::size_t k, double sigma) {
        if (k == 0 || k % 2 == 0) {
            throw std::invalid_argument("BlurKernel: size must be odd and positive, got " +
                                        std::to_string(k));
        }
        BlurKernel kern;
        kern.sigma_ = sigma;
        if (k == 1) {
            kern.profile_ = {1.0};
            return kern;
        }
        if (!(sigma > 0.0)) throw std::invalid_argument("BlurKernel: sigma must be positive");
        const auto half = static_cast<long>(k / 2);
        kern.profile_.resize(k);
        double total = 0.0;
        for (long u = -half; u <= half; ++u) {
            const double g = std::exp(-static_cast<double>(u * u) / (2.0 * sigma * sigma));
            kern.profile_[static_cast<std::size_t>(u + half)] = g;
            total += g;
        }
        for (double& g : kern.profile_) g /= total;
        // Pin exact mirror symmetry so 8-fold symmetry holds bit-for-bit.
        for (std::size_t i = 0; i < k / 2; ++i) kern.profile_[k - 1 - i] = kern.profile_[i];
        return kern;
    }

private:
    BlurKernel() = default;

    std::vector<double> profile_;
    double sigma_ = 0.0;
};

/// Kernel of odd size k with sigma = (k-1)/6, so that k = 2*ceil(3*sigma) + 1.
inline BlurKernel gaussian_kernel(std::size_t k) {
    if (k == 0 || k % 2 == 0) {
        throw std::invalid_argument("gaussian_kernel: size must be odd and positive, got " +
                                    std::to_string(k));
    }
    return BlurKernel::make(k, static_cast<double>(k - 1) / 6.0);
}

/// Size from sigma: k = 2*ceil(3*sigma) + 1.
inline std::size_t kernel_size_for_sigma(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel_from_sigma: sigma must be positive");
    return 2 * static_cast<std::size_t>(std::ceil(3.0 * sigma)) + 1;
}

inline BlurKernel kernel_from_sigma(double sigma) {
    return BlurKernel::make(kernel_size_for_sigma(sigma), sigma);
}

namespace detail {

/// Half-sample symmetric reflection (d c b a | a b c d | d c b a), periodic in 2n,
/// so kernels wider than the image are handled too.
inline std::size_t reflect_index(long i, std::size_t n) noexcept {
    const long period = 2 * static_cast<long>(n);
    long m = i % period;
    if (m < 0) m += period;
    return m < static_cast<long>(n) ? static_cast<std::size_t>(m)
                                    : static_cast<std::size_t>(period - 1 - m);
}

}  // namespace detail

/// Convolution with reflective boundary handling, computed separably.
inline GrayImage blur(const GrayImage& img, const BlurKernel& kernel) {
    if (kernel.size() == 1) return img;
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const auto half = static_cast<long>(kernel.radius());
    const auto& g = kernel.profile();
    const Plane& src = img.plane();

    Plane horiz(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (long u = -half; u <= half; ++u) {
                acc += g[static_cast<std::size_t>(u + half)] *
                       src(r, detail::reflect_index(static_cast<long>(c) + u, w));
            }
            horiz(r, c) = acc;
        }
    }
    Plane out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (long u = -half; u <= half; ++u) {
                acc += g[static_cast<std::size_t>(u + half)] *
                       horiz(detail::reflect_index(static_cast<long>(r) + u, h), c);
            }
            out(r, c) = acc;
        }
    }
    return GrayImage(std::move(out));
}

}  // namespace usdegrade
