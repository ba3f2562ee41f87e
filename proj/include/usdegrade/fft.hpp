#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "usdegrade/image.hpp"

namespace usdegrade {

namespace detail {

using cplx = std::complex<double>;

constexpr bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Unnormalised 1D DFT of arbitrary length. Powers of two use an iterative radix-2
/// transform; other lengths go through Bluestein's chirp-z convolution on a padded
/// power-of-two grid. Twiddles are evaluated directly (no recurrences) to keep the
/// round-trip error near machine precision.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        if (n_ <= 1) return;
        if (is_pow2(n_)) {
            twiddle_.resize(n_ / 2);
            for (std::size_t k = 0; k < n_ / 2; ++k) {
                twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                                  static_cast<double>(n_));
            }
            return;
        }
        m_ = 1;
        while (m_ < 2 * n_ - 1) m_ <<= 1;
        inner_ = std::make_unique<FftPlan>(m_);
        chirp_.resize(n_);
        const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // exp(-i*pi*k^2/n), with k^2 reduced mod 2n to keep the argument small.
            const std::uint64_t kk = (static_cast<std::uint64_t>(k) * k) % two_n;
            chirp_[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(kk) /
                                            static_cast<double>(n_));
        }
        filter_.assign(m_, cplx{});
        filter_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            filter_[k] = std::conj(chirp_[k]);
            filter_[m_ - k] = std::conj(chirp_[k]);
        }
        inner_->forward(filter_);
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<cplx> data) const {
        if (n_ <= 1) return;
        if (inner_) {
            bluestein(data);
        } else {
            radix2(data, false);
        }
    }

    /// Unnormalised inverse (no 1/n factor).
    void inverse(std::span<cplx> data) const {
        if (n_ <= 1) return;
        if (inner_) {
            for (auto& v : data) v = std::conj(v);
            bluestein(data);
            for (auto& v : data) v = std::conj(v);
        } else {
            radix2(data, true);
        }
    }

private:
    void radix2(std::span<cplx> a, bool inverse) const {
        const std::size_t n = n_;
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = n / len;
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const cplx w = inverse ? std::conj(twiddle_[j * step]) : twiddle_[j * step];
                    const cplx u = a[i + j];
                    const cplx v = a[i + j + half] * w;
                    a[i + j] = u + v;
                    a[i + j + half] = u - v;
                }
            }
        }
    }

    void bluestein(std::span<cplx> data) const {
        std::vector<cplx> work(m_, cplx{});
        for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
        inner_->forward(work);
        for (std::size_t k = 0; k < m_; ++k) work[k] *= filter_[k];
        inner_->inverse(work);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * scale * chirp_[k];
    }

    std::size_t n_;
    std::size_t m_ = 0;
    std::vector<cplx> twiddle_;
    std::vector<cplx> chirp_;
    std::vector<cplx> filter_;
    std::unique_ptr<FftPlan> inner_;
};

inline void transform_2d(Spectrum& s, bool inverse) {
    const std::size_t h = s.height();
    const std::size_t w = s.width();
    const FftPlan row_plan(w);
    for (std::size_t r = 0; r < h; ++r) {
        inverse ? row_plan.inverse(s.row(r)) : row_plan.forward(s.row(r));
    }
    const FftPlan col_plan(h);
    std::vector<cplx> column(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) column[r] = s(r, c);
        inverse ? col_plan.inverse(column) : col_plan.forward(column);
        for (std::size_t r = 0; r < h; ++r) s(r, c) = column[r];
    }
}

}  // namespace detail

/// Unnormalised forward 2D DFT; the DC bin equals the pixel sum.
inline Spectrum fft2(const Plane& plane) {
    Spectrum s(plane.height(), plane.width());
    std::copy(plane.begin(), plane.end(), s.begin());
    detail::transform_2d(s, false);
    return s;
}

inline Spectrum fft2(const GrayImage& img) { return fft2(img.plane()); }

/// Inverse 2D DFT including the 1/(H*W) factor.
inline Spectrum ifft2(Spectrum spec) {
    detail::transform_2d(spec, true);
    const double scale = 1.0 / static_cast<double>(spec.size());
    for (auto& v : spec) v *= scale;
    return spec;
}

/// |ifft2(spec)| per pixel, clipped to [0,1].
inline GrayImage ifft2_magnitude(const Spectrum& spec) {
    const Spectrum spatial = ifft2(spec);
    Plane out(spatial.height(), spatial.width());
    for (std::size_t i = 0; i < spatial.size(); ++i) out.data()[i] = std::abs(spatial.data()[i]);
    return GrayImage(std::move(out));
}

/// Largest complex modulus over all bins, DC included.
inline double max_modulus(const Spectrum& spec) {
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    return peak;
}

}  // namespace usdegrade
