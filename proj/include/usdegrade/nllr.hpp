#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "usdegrade/image.hpp"

namespace usdegrade {

/// Non-local low-rank denoiser settings.
struct NllrParams {
    std::size_t patch_size = 8;
    std::size_t stride = 4;
    std::size_t search_radius = 15;  // window of (2r+1)^2 candidate origins
    std::size_t group_size = 32;
    double shrink_lambda = 1.2;
    std::size_t iterations = 1;
    double relax_delta = 0.1;

    void validate() const {
        if (patch_size < 2) throw std::invalid_argument("NllrParams: patch_size must be >= 2");
        if (stride == 0 || stride > patch_size) {
            throw std::invalid_argument("NllrParams: stride must lie in [1, patch_size]");
        }
        if (group_size < 2) throw std::invalid_argument("NllrParams: group_size must be >= 2");
        const std::size_t window = 2 * search_radius + 1;
        if (window * window < group_size) {
            throw std::invalid_argument("NllrParams: search window holds fewer than group_size patches");
        }
        if (!(shrink_lambda > 0.0)) throw std::invalid_argument("NllrParams: shrink_lambda must be > 0");
        if (iterations == 0) throw std::invalid_argument("NllrParams: iterations must be >= 1");
        if (!(relax_delta >= 0.0 && relax_delta < 1.0)) {
            throw std::invalid_argument("NllrParams: relax_delta must lie in [0, 1)");
        }
    }

    friend bool operator==(const NllrParams&, const NllrParams&) = default;
};

inline void to_json(nlohmann::json& j, const NllrParams& p) {
    j = nlohmann::json{{"patch_size", p.patch_size},       {"stride", p.stride},
                       {"search_radius", p.search_radius}, {"group_size", p.group_size},
                       {"shrink_lambda", p.shrink_lambda}, {"iterations", p.iterations},
                       {"relax_delta", p.relax_delta}};
}

inline void from_json(const nlohmann::json& j, NllrParams& p) {
    const NllrParams d;
    p.patch_size = j.value("patch_size", d.patch_size);
    p.stride = j.value("stride", d.stride);
    p.search_radius = j.value("search_radius", d.search_radius);
    p.group_size = j.value("group_size", d.group_size);
    p.shrink_lambda = j.value("shrink_lambda", d.shrink_lambda);
    p.iterations = j.value("iterations", d.iterations);
    p.relax_delta = j.value("relax_delta", d.relax_delta);
}

/// Robust noise level: median |d| / 0.6745, d the response of the 2x2 Haar diagonal filter
/// [[+.5, -.5], [-.5, +.5]] at every valid position. For i.i.d. noise d has the pixel std.
inline double estimate_noise_sigma(const Plane& img) {
    if (img.height() < 2 || img.width() < 2) {
        throw std::invalid_argument("estimate_noise_sigma: image must be at least 2x2");
    }
    std::vector<double> d;
    d.reserve((img.height() - 1) * (img.width() - 1));
    for (std::size_t r = 0; r + 1 < img.height(); ++r) {
        for (std::size_t c = 0; c + 1 < img.width(); ++c) {
            d.push_back(std::abs(0.5 * (img(r, c) - img(r, c + 1) - img(r + 1, c) + img(r + 1, c + 1))));
        }
    }
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    double median = d[mid];
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    return median / 0.6745;
}

inline double estimate_noise_sigma(const GrayImage& img) { return estimate_noise_sigma(img.plane()); }

/// A reference patch and its most similar neighbours, one patch per column
/// (row-major within the patch). members[0] is always the reference.
struct PatchGroup {
    PixelPos reference{};
    std::vector<PixelPos> members;
    Eigen::MatrixXd matrix;
    bool padded = false;      // fewer candidates than group_size; best matches repeated
    std::size_t rank = 0;     // retained rank after shrinkage
};

namespace detail {

inline double patch_ssd(const Plane& img, PixelPos a, PixelPos b, std::size_t p) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        const double* ra = &img(a.row + i, a.col);
        const double* rb = &img(b.row + i, b.col);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = ra[j] - rb[j];
            acc += d * d;
        }
    }
    return acc;
}

inline void load_patch(const Plane& img, PixelPos at, std::size_t p, Eigen::Ref<Eigen::VectorXd> out) {
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            out(static_cast<Eigen::Index>(i * p + j)) = img(at.row + i, at.col + j);
}

}  // namespace detail

/// Up to group_size patches within the search window ranked by SSD to the reference, ties
/// in row-major scan order, reference first.
inline PatchGroup block_match(const Plane& img, PixelPos ref, const NllrParams& params) {
    const std::size_t p = params.patch_size;
    if (img.height() < p || img.width() < p || ref.row + p > img.height() || ref.col + p > img.width()) {
        throw std::invalid_argument("block_match: reference patch not inside the image");
    }
    const std::size_t max_r = img.height() - p;
    const std::size_t max_c = img.width() - p;
    const std::size_t R = params.search_radius;
    const std::size_t r_lo = ref.row > R ? ref.row - R : 0;
    const std::size_t c_lo = ref.col > R ? ref.col - R : 0;
    const std::size_t r_hi = std::min(ref.row + R, max_r);
    const std::size_t c_hi = std::min(ref.col + R, max_c);

    struct Candidate {
        double ssd;
        std::size_t order;
        PixelPos pos;
    };
    std::vector<Candidate> cands;
    cands.reserve((r_hi - r_lo + 1) * (c_hi - c_lo + 1));
    std::size_t order = 0;
    for (std::size_t r = r_lo; r <= r_hi; ++r) {
        for (std::size_t c = c_lo; c <= c_hi; ++c, ++order) {
            if (r == ref.row && c == ref.col) continue;
            cands.push_back({detail::patch_ssd(img, ref, {r, c}, p), order, {r, c}});
        }
    }
    const auto before = [](const Candidate& a, const Candidate& b) {
        return a.ssd < b.ssd || (a.ssd == b.ssd && a.order < b.order);
    };
    const std::size_t want = params.group_size - 1;
    const std::size_t take = std::min(want, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(), before);

    PatchGroup g;
    g.reference = ref;
    g.members.reserve(params.group_size);
    g.members.push_back(ref);
    for (std::size_t i = 0; i < take; ++i) g.members.push_back(cands[i].pos);
    if (g.members.size() < params.group_size) {
        g.padded = true;
        const std::size_t have = g.members.size();
        for (std::size_t i = 0; g.members.size() < params.group_size; ++i) {
            g.members.push_back(g.members[i % have]);
        }
    }

    g.matrix.resize(static_cast<Eigen::Index>(p * p), static_cast<Eigen::Index>(g.members.size()));
    for (std::size_t j = 0; j < g.members.size(); ++j) {
        detail::load_patch(img, g.members[j], p, g.matrix.col(static_cast<Eigen::Index>(j)));
    }
    return g;
}

/// Low-rank shrinkage of one group: subtract each column's mean, soft-threshold the
/// singular values by tau = lambda * sigma * sqrt(max(p^2, K)), rebuild, add the means back.
inline PatchGroup shrink_group(PatchGroup group, double sigma, const NllrParams& params) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("shrink_group: sigma must be >= 0");
    Eigen::MatrixXd& m = group.matrix;
    const Eigen::RowVectorXd means = m.colwise().mean();
    Eigen::MatrixXd centered = m.rowwise() - means;
    if (centered.isZero(0.0)) {
        group.rank = 0;
        return group;
    }
    const double dim = static_cast<double>(std::max<Eigen::Index>(m.rows(), m.cols()));
    const double tau = params.shrink_lambda * sigma * std::sqrt(dim);

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = (svd.singularValues().array() - tau).cwiseMax(0.0).matrix();
    group.rank = static_cast<std::size_t>((s.array() > 0.0).count());
    m = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    m.rowwise() += means;
    return group;
}

namespace detail {
inline std::vector<std::size_t> reference_grid(std::size_t extent, std::size_t p, std::size_t stride) {
    std::vector<std::size_t> grid;
    const std::size_t last = extent - p;
    for (std::size_t v = 0; v <= last; v += stride) grid.push_back(v);
    if (grid.back() != last) grid.push_back(last);
    return grid;
}
}  // namespace detail

/// Block matching, per-group singular-value shrinkage and overlapped aggregation with group
/// weight 1/(1 + rank). Iterations after the first start from the relaxed image
/// (1 - delta) * current + delta * original. Each iteration's output is clipped. Deterministic.
inline GrayImage nllr_denoise(const GrayImage& img, const NllrParams& params = {}) {
    params.validate();
    const std::size_t p = params.patch_size;
    if (img.height() < p || img.width() < p) {
        throw std::invalid_argument("nllr_denoise: image (" + std::to_string(img.height()) + "x" +
                                    std::to_string(img.width()) + ") smaller than the patch");
    }
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const auto rows = detail::reference_grid(h, p, params.stride);
    const auto cols = detail::reference_grid(w, p, params.stride);

    const Plane& original = img.plane();
    Plane current = original;
    for (std::size_t it = 0; it < params.iterations; ++it) {
        Plane input = original;
        if (it > 0) {
            for (std::size_t i = 0; i < input.size(); ++i) {
                input.data()[i] = (1.0 - params.relax_delta) * current.data()[i] +
                                  params.relax_delta * original.data()[i];
            }
        }
        const double sigma = estimate_noise_sigma(input);

        Plane num(h, w, 0.0);
        Plane den(h, w, 0.0);
        for (std::size_t r : rows) {
            for (std::size_t c : cols) {
                const PatchGroup g = shrink_group(block_match(input, {r, c}, params), sigma, params);
                const double weight = 1.0 / (1.0 + static_cast<double>(g.rank));
                for (std::size_t j = 0; j < g.members.size(); ++j) {
                    const PixelPos at = g.members[j];
                    const auto col = g.matrix.col(static_cast<Eigen::Index>(j));
                    for (std::size_t a = 0; a < p; ++a) {
                        for (std::size_t b = 0; b < p; ++b) {
                            num(at.row + a, at.col + b) += weight * col(static_cast<Eigen::Index>(a * p + b));
                            den(at.row + a, at.col + b) += weight;
                        }
                    }
                }
            }
        }
        for (std::size_t i = 0; i < current.size(); ++i) {
            current.data()[i] = clamp_unit(num.data()[i] / den.data()[i]);
        }
    }
    return GrayImage(std::move(current));
}

}  // namespace usdegrade
