#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usdegrade/image.hpp"

namespace usdegrade {

// ---------------------------------------------------------------------------
// Profiles and resolution metrics
// ---------------------------------------------------------------------------

/// 1D intensity profile with unit sample spacing. At least two samples, all in [0,1].
class Profile {
public:
    explicit Profile(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.size() < 2) throw std::invalid_argument("Profile: need at least 2 samples");
        for (double v : samples_) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("Profile: samples must lie in [0, 1]");
            }
        }
    }

    std::size_t size() const noexcept { return samples_.size(); }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    const std::vector<double>& samples() const noexcept { return samples_; }

private:
    std::vector<double> samples_;
};

enum class ProfileAxis { along_rows, along_cols };

/// Half-open pixel ranges [r0, r1) x [c0, c1).
struct RoiSpec {
    std::size_t r0 = 0;
    std::size_t r1 = 0;
    std::size_t c0 = 0;
    std::size_t c1 = 0;
    ProfileAxis axis = ProfileAxis::along_rows;
};

/// The vertical strip used for the resolution study: rows 1..200 and columns 195..200 in
/// one-based inclusive terms.
inline RoiSpec vertical_strip_roi() { return {0, 200, 194, 200, ProfileAxis::along_rows}; }

/// along_rows yields one sample per ROI row (mean over the ROI columns); along_cols the
/// transpose.
inline Profile extract_profile(const GrayImage& img, const RoiSpec& roi) {
    if (roi.r0 >= roi.r1 || roi.c0 >= roi.c1 || roi.r1 > img.height() || roi.c1 > img.width()) {
        throw std::invalid_argument("extract_profile: ROI empty or outside the image");
    }
    std::vector<double> out;
    if (roi.axis == ProfileAxis::along_rows) {
        const double n = static_cast<double>(roi.c1 - roi.c0);
        for (std::size_t r = roi.r0; r < roi.r1; ++r) {
            double acc = 0.0;
            for (std::size_t c = roi.c0; c < roi.c1; ++c) acc += img(r, c);
            out.push_back(std::min(acc / n, 1.0));
        }
    } else {
        const double n = static_cast<double>(roi.r1 - roi.r0);
        for (std::size_t c = roi.c0; c < roi.c1; ++c) {
            double acc = 0.0;
            for (std::size_t r = roi.r0; r < roi.r1; ++r) acc += img(r, c);
            out.push_back(std::min(acc / n, 1.0));
        }
    }
    return Profile(std::move(out));
}

enum class FwhmMode {
    interpolated,  ///< linear interpolation of the outermost half-max crossings
    sample_count,  ///< number of samples at or above half max
};

/// Full width at half maximum, half level measured from zero. Undefined (nullopt) when the
/// profile is all zero or does not fall below the half level on both sides.
inline std::optional<double> fwhm(const Profile& p, FwhmMode mode = FwhmMode::interpolated) {
    const auto& s = p.samples();
    const double peak = *std::max_element(s.begin(), s.end());
    if (!(peak > 0.0)) return std::nullopt;
    const double half = peak / 2.0;

    if (mode == FwhmMode::sample_count) {
        return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v >= half; }));
    }

    const std::size_t n = s.size();
    std::size_t first = 0;
    while (s[first] < half) ++first;
    std::size_t last = n - 1;
    while (s[last] < half) --last;
    if (first == 0 || last == n - 1) return std::nullopt;

    const double x1 = static_cast<double>(first - 1) + (half - s[first - 1]) / (s[first] - s[first - 1]);
    const double x2 = static_cast<double>(last) + (s[last] - half) / (s[last] - s[last + 1]);
    return x2 - x1;
}

struct GradStats {
    double grad_mean = 0.0;
    double grad_max = 0.0;
};

/// |dp/dx| by central differences inside, one-sided differences at both ends.
inline GradStats grad_stats(const Profile& p) {
    const auto& s = p.samples();
    const std::size_t n = s.size();
    GradStats g;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i == 0) {
            d = s[1] - s[0];
        } else if (i == n - 1) {
            d = s[n - 1] - s[n - 2];
        } else {
            d = (s[i + 1] - s[i - 1]) / 2.0;
        }
        d = std::abs(d);
        total += d;
        g.grad_max = std::max(g.grad_max, d);
    }
    g.grad_mean = total / static_cast<double>(n);
    return g;
}

/// (I_max - I_min) / (I_max + I_min); undefined for an all-zero profile.
inline std::optional<double> contrast(const Profile& p) {
    const auto [lo, hi] = std::minmax_element(p.samples().begin(), p.samples().end());
    if (!(*hi + *lo > 0.0)) return std::nullopt;
    return (*hi - *lo) / (*hi + *lo);
}

enum class Band { ideal, good, fair, poor };

inline std::string to_string(Band b) {
    switch (b) {
        case Band::ideal: return "ideal";
        case Band::good: return "good";
        case Band::fair: return "fair";
        case Band::poor: return "poor";
    }
    return "unknown";
}

namespace detail {
// ideal >= a, good [b, a), fair (c, b), poor <= c
inline Band band_for(double v, double ideal_at, double good_at, double poor_at) {
    if (v >= ideal_at) return Band::ideal;
    if (v >= good_at) return Band::good;
    if (v > poor_at) return Band::fair;
    return Band::poor;
}
}  // namespace detail

inline Band band_grad_mean(double v) { return detail::band_for(v, 0.05, 0.03, 0.02); }
inline Band band_grad_max(double v) { return detail::band_for(v, 0.30, 0.18, 0.12); }
inline Band band_contrast(double v) { return detail::band_for(v, 0.95, 0.90, 0.80); }

struct ResolutionReport {
    std::optional<double> fwhm_px;
    double grad_mean = 0.0;
    double grad_max = 0.0;
    std::optional<double> contrast;
    Band band_grad_mean = Band::poor;
    Band band_grad_max = Band::poor;
    Band band_contrast = Band::poor;
};

/// Fills the three band labels. An undefined contrast is labelled poor.
inline ResolutionReport classify_bands(ResolutionReport r) {
    r.band_grad_mean = band_grad_mean(r.grad_mean);
    r.band_grad_max = band_grad_max(r.grad_max);
    r.band_contrast = r.contrast ? band_contrast(*r.contrast) : Band::poor;
    return r;
}

inline ResolutionReport resolution_report(const Profile& p, FwhmMode mode = FwhmMode::interpolated) {
    ResolutionReport r;
    r.fwhm_px = fwhm(p, mode);
    const GradStats g = grad_stats(p);
    r.grad_mean = g.grad_mean;
    r.grad_max = g.grad_max;
    r.contrast = contrast(p);
    return classify_bands(r);
}

// ---------------------------------------------------------------------------
// Full-image quality metrics (8-bit scale, L = 255)
// ---------------------------------------------------------------------------

inline constexpr double kPeak = 255.0;

namespace detail {
inline void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw std::invalid_argument(std::string(what) + ": image dimensions differ (" +
                                    std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                    " vs " + std::to_string(b.height()) + "x" +
                                    std::to_string(b.width()) + ")");
    }
}

inline double to_8bit(double v, bool round_to_byte) {
    const double s = v * kPeak;
    return round_to_byte ? std::floor(s + 0.5) : s;
}
}  // namespace detail

struct PsnrOptions {
    /// Quantise both images to integer bytes before the MSE.
    bool round_to_byte = false;
};

inline double mse_8bit(const GrayImage& reference, const GrayImage& test, const PsnrOptions& opts = {}) {
    detail::require_same_shape(reference, test, "psnr");
    double acc = 0.0;
    const auto a = reference.values();
    const auto b = test.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = detail::to_8bit(a[i], opts.round_to_byte) - detail::to_8bit(b[i], opts.round_to_byte);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

/// 10 log10(255^2 / MSE); +infinity when the images agree exactly.
inline double psnr(const GrayImage& reference, const GrayImage& test, const PsnrOptions& opts = {}) {
    const double mse = mse_8bit(reference, test, opts);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kPeak * kPeak / mse);
}

enum class SsimWindow {
    uniform7,    ///< 7x7 box, unbiased (N-1) moments
    gaussian11,  ///< 11x11 Gaussian, sigma 1.5, weighted moments
};

struct SsimOptions {
    SsimWindow window = SsimWindow::uniform7;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean SSIM over all fully interior window positions of the 8-bit-scaled images.
inline double ssim(const GrayImage& reference, const GrayImage& test, const SsimOptions& opts = {}) {
    detail::require_same_shape(reference, test, "ssim");
    const std::size_t win = opts.window == SsimWindow::uniform7 ? 7 : 11;
    const std::size_t h = reference.height();
    const std::size_t w = reference.width();
    if (h < win || w < win) {
        throw std::invalid_argument("ssim: image smaller than the " + std::to_string(win) + "x" +
                                    std::to_string(win) + " window");
    }
    const double c1 = (opts.k1 * kPeak) * (opts.k1 * kPeak);
    const double c2 = (opts.k2 * kPeak) * (opts.k2 * kPeak);

    std::vector<double> weights(win, 1.0);
    if (opts.window == SsimWindow::gaussian11) {
        double total = 0.0;
        for (std::size_t i = 0; i < win; ++i) {
            const double u = static_cast<double>(i) - 5.0;
            weights[i] = std::exp(-u * u / (2.0 * 1.5 * 1.5));
            total += weights[i];
        }
        for (double& v : weights) v /= total;
    }

    // Separable windowed sums of x, y, x^2, y^2, xy: columns first, then rows.
    const std::size_t oh = h - win + 1;
    const std::size_t ow = w - win + 1;
    std::array<Plane, 5> colsum;
    for (auto& p : colsum) p = Plane(oh, w, 0.0);
    const Plane& x = reference.plane();
    const Plane& y = test.plane();
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t k = 0; k < win; ++k) {
                const double a = x(r + k, c) * kPeak;
                const double b = y(r + k, c) * kPeak;
                const double wk = weights[k];
                sx += wk * a;
                sy += wk * b;
                sxx += wk * a * a;
                syy += wk * b * b;
                sxy += wk * a * b;
            }
            colsum[0](r, c) = sx;
            colsum[1](r, c) = sy;
            colsum[2](r, c) = sxx;
            colsum[3](r, c) = syy;
            colsum[4](r, c) = sxy;
        }
    }

    const bool uniform = opts.window == SsimWindow::uniform7;
    const double n = static_cast<double>(win * win);
    double total = 0.0;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            std::array<double, 5> s{};
            for (std::size_t k = 0; k < win; ++k) {
                for (std::size_t q = 0; q < 5; ++q) s[q] += weights[k] * colsum[q](r, c + k);
            }
            double mx, my, vx, vy, cxy;
            if (uniform) {
                mx = s[0] / n;
                my = s[1] / n;
                vx = (s[2] - s[0] * mx) / (n - 1.0);
                vy = (s[3] - s[1] * my) / (n - 1.0);
                cxy = (s[4] - s[0] * my) / (n - 1.0);
            } else {
                mx = s[0];
                my = s[1];
                vx = s[2] - mx * mx;
                vy = s[3] - my * my;
                cxy = s[4] - mx * my;
            }
            const double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
        }
    }
    return total / static_cast<double>(oh * ow);
}

struct QualityReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

inline QualityReport quality_report(const GrayImage& reference, const GrayImage& test) {
    return {psnr(reference, test), ssim(reference, test)};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Finite values as numbers; +/-infinity as the strings "inf" / "-inf"; NaN as null.
inline nlohmann::json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline nlohmann::json json_optional(const std::optional<double>& v) {
    return v ? json_number(*v) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const QualityReport& q) {
    j = nlohmann::json{{"psnr_db", json_number(q.psnr_db)}, {"ssim", json_number(q.ssim)}};
}

inline void to_json(nlohmann::json& j, const ResolutionReport& r) {
    j = nlohmann::json{{"fwhm_px", json_optional(r.fwhm_px)},
                       {"grad_mean", r.grad_mean},
                       {"grad_max", r.grad_max},
                       {"contrast", json_optional(r.contrast)},
                       {"band_grad_mean", to_string(r.band_grad_mean)},
                       {"band_grad_max", to_string(r.band_grad_max)},
                       {"band_contrast", to_string(r.band_contrast)}};
}

}  // namespace usdegrade
