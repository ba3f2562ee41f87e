#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "usdegrade/blur.hpp"
#include "usdegrade/fft.hpp"
#include "usdegrade/image.hpp"
#include "usdegrade/random.hpp"

namespace usdegrade {

struct FourierOptions {
    /// Variance of each of the real and imaginary parts of zeta. 0.5 gives E|zeta|^2 = 1;
    /// set 1.0 for unit variance per part.
    double zeta_part_variance = 0.5;
};

/// One complex Gaussian draw per bin, row-major, real part drawn before imaginary.
/// No Hermitian symmetrisation.
inline Spectrum draw_zeta(std::size_t height, std::size_t width, RandomStream& rng,
                          const FourierOptions& opts = {}) {
    if (!(opts.zeta_part_variance > 0.0)) {
        throw std::invalid_argument("draw_zeta: part variance must be positive");
    }
    const double sd = std::sqrt(opts.zeta_part_variance);
    Spectrum zeta(height, width);
    for (auto& z : zeta) {
        const double re = rng.normal(0.0, sd);
        const double im = rng.normal(0.0, sd);
        z = {re, im};
    }
    return zeta;
}

/// (1 - gamma) * clean + gamma * max|clean| * zeta, bin by bin.
inline Spectrum fourier_blend(const Spectrum& clean, const Spectrum& zeta, double gamma) {
    if (clean.height() != zeta.height() || clean.width() != zeta.width()) {
        throw std::invalid_argument("fourier_blend: spectrum and noise shapes differ");
    }
    const double peak = max_modulus(clean);
    Spectrum out(clean.height(), clean.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = (1.0 - gamma) * clean.data()[i] + (gamma * peak) * zeta.data()[i];
    }
    return out;
}

/// Fourier-domain complex perturbation: blend the spectrum with scaled complex Gaussian
/// noise, invert, take the modulus and clip. The noise is always drawn, so the stream
/// advances identically for every gamma; gamma == 0 returns the input unchanged.
inline GrayImage fourier_perturb(const GrayImage& img, double gamma, RandomStream& rng,
                                 const FourierOptions& opts = {}) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("fourier_perturb: gamma must lie in [0, 1]");
    }
    const Spectrum zeta = draw_zeta(img.height(), img.width(), rng, opts);
    if (gamma == 0.0) return img;
    return ifft2_magnitude(fourier_blend(fft2(img), zeta, gamma));
}

/// Transfer function of the kernel on an h x w grid: taps centred on the origin with
/// wrap-around, i.e. a circular-convolution model.
inline Spectrum kernel_transfer(const BlurKernel& kernel, std::size_t height, std::size_t width) {
    Plane embedded(height, width, 0.0);
    const auto half = static_cast<long>(kernel.radius());
    const auto wrap = [](long i, std::size_t n) {
        const long m = i % static_cast<long>(n);
        return static_cast<std::size_t>(m < 0 ? m + static_cast<long>(n) : m);
    };
    for (long u = -half; u <= half; ++u) {
        for (long v = -half; v <= half; ++v) {
            embedded(wrap(u, height), wrap(v, width)) +=
                kernel.tap(static_cast<std::size_t>(u + half), static_cast<std::size_t>(v + half));
        }
    }
    return fft2(embedded);
}

/// Classical Wiener deconvolution: conj(H) * F / (|H|^2 + nsr).
inline GrayImage wiener_deblur(const GrayImage& img, const BlurKernel& kernel, double nsr) {
    if (!(nsr > 0.0)) throw std::invalid_argument("wiener_deblur: nsr must be positive");
    const Spectrum transfer = kernel_transfer(kernel, img.height(), img.width());
    Spectrum est = fft2(img);
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto hk = transfer.data()[i];
        est.data()[i] = std::conj(hk) * est.data()[i] / (std::norm(hk) + nsr);
    }
    return ifft2_magnitude(est);
}

}  // namespace usdegrade
