#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usdegrade/blur.hpp"
#include "usdegrade/image.hpp"
#include "usdegrade/noise.hpp"
#include "usdegrade/random.hpp"
#include "usdegrade/spectral.hpp"

namespace usdegrade {

enum class NoiseFamily { additive_gaussian, fourier, speckle };

inline std::string to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::additive_gaussian: return "additive_gaussian";
        case NoiseFamily::fourier: return "fourier";
        case NoiseFamily::speckle: return "speckle";
    }
    return "unknown";
}

inline NoiseFamily parse_noise_family(const std::string& s) {
    if (s == "additive_gaussian") return NoiseFamily::additive_gaussian;
    if (s == "fourier") return NoiseFamily::fourier;
    if (s == "speckle") return NoiseFamily::speckle;
    throw std::invalid_argument("unknown noise family '" + s + "'");
}

/// Only the field belonging to `family` is used when the noise is applied.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::additive_gaussian;
    double sigma_g = 0.0;
    double gamma_f = 0.0;
    double enl_L = 1.0;

    void validate() const {
        if (!(sigma_g >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma_g must be >= 0");
        if (!(gamma_f >= 0.0 && gamma_f <= 1.0)) {
            throw std::invalid_argument("NoiseSpec: gamma_f must lie in [0, 1]");
        }
        if (!(enl_L >= 1.0)) throw std::invalid_argument("NoiseSpec: enl_L must be >= 1");
    }

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

inline GrayImage apply_noise(const GrayImage& img, const NoiseSpec& noise, RandomStream& rng,
                             const FourierOptions& opts = {}) {
    switch (noise.family) {
        case NoiseFamily::additive_gaussian: return add_gaussian_noise(img, noise.sigma_g, rng);
        case NoiseFamily::fourier: return fourier_perturb(img, noise.gamma_f, rng, opts);
        case NoiseFamily::speckle: return speckle(img, noise.enl_L, rng);
    }
    throw std::logic_error("apply_noise: bad family");
}

/// One complete draw of the training corruption. Replaying it needs nothing else: the
/// noise realisations come from RandomStream(seed, 0).
struct DegradationSpec {
    bool applied_blur_noise = false;
    std::size_t blur_k = 3;
    NoiseSpec noise{};
    bool applied_light_path = false;
    double light_gamma_f = 0.0;
    std::size_t light_blur_k = 3;
    double zeta_part_variance = FourierOptions{}.zeta_part_variance;
    std::uint64_t seed = 0;

    void validate() const {
        if (blur_k == 0 || blur_k % 2 == 0 || light_blur_k == 0 || light_blur_k % 2 == 0) {
            throw std::invalid_argument("DegradationSpec: blur sizes must be odd and positive");
        }
        noise.validate();
        if (!(light_gamma_f >= 0.0 && light_gamma_f <= 1.0)) {
            throw std::invalid_argument("DegradationSpec: light_gamma_f must lie in [0, 1]");
        }
        if (!(zeta_part_variance > 0.0)) {
            throw std::invalid_argument("DegradationSpec: zeta_part_variance must be positive");
        }
    }

    friend bool operator==(const DegradationSpec&, const DegradationSpec&) = default;
};

/// Probabilities and ranges of the stochastic composition.
struct CompositionConfig {
    double p_blur_noise = 0.55;
    double p_light = 0.45;
    std::vector<std::size_t> blur_sizes{3, 5, 7, 9, 11, 13, 15, 17};
    double sigma_g_min = 0.05;
    double sigma_g_max = 0.20;
    double gamma_f_max = 0.2;
    std::size_t light_blur_k = 3;
    FourierOptions fourier{};
};

/// Draws one composition. Every random quantity is drawn on every call, in a fixed order,
/// and recorded whether or not its path fires.
inline DegradationSpec draw_training_degradation(RandomStream& rng, const CompositionConfig& cfg = {}) {
    if (cfg.blur_sizes.empty()) throw std::invalid_argument("CompositionConfig: no blur sizes");
    DegradationSpec spec;
    spec.applied_blur_noise = rng.bernoulli(cfg.p_blur_noise);
    const auto k_index = rng.uniform_int(0, static_cast<std::int64_t>(cfg.blur_sizes.size()) - 1);
    spec.blur_k = cfg.blur_sizes[static_cast<std::size_t>(k_index)];
    spec.noise.family = rng.bernoulli(0.5) ? NoiseFamily::fourier : NoiseFamily::additive_gaussian;
    spec.noise.sigma_g = rng.uniform(cfg.sigma_g_min, cfg.sigma_g_max);
    spec.noise.gamma_f = rng.uniform(0.0, cfg.gamma_f_max);
    spec.applied_light_path = rng.bernoulli(cfg.p_light);
    spec.light_gamma_f = rng.uniform(0.0, cfg.gamma_f_max);
    spec.light_blur_k = cfg.light_blur_k;
    spec.zeta_part_variance = cfg.fourier.zeta_part_variance;
    spec.seed = rng.next_u64();
    return spec;
}

/// Executes the composition: blur -> noise if flagged, then the light fourier -> blur path
/// if flagged. Every step clips.
inline GrayImage apply_degradation(const GrayImage& img, const DegradationSpec& spec) {
    spec.validate();
    RandomStream rng(spec.seed, 0);
    const FourierOptions opts{spec.zeta_part_variance};
    GrayImage out = img;
    if (spec.applied_blur_noise) {
        out = blur(out, gaussian_kernel(spec.blur_k));
        out = apply_noise(out, spec.noise, rng, opts);
    }
    if (spec.applied_light_path) {
        out = fourier_perturb(out, spec.light_gamma_f, rng, opts);
        out = blur(out, gaussian_kernel(spec.light_blur_k));
    }
    return out;
}

/// Test-time stress corruption: optional fixed blur, then fourier noise at a chosen gamma.
inline GrayImage stress_degradation(const GrayImage& img, double gamma_f,
                                    std::optional<std::size_t> blur_k, RandomStream& rng,
                                    const FourierOptions& opts = {}) {
    if (!(gamma_f >= 0.0 && gamma_f <= 1.0)) {
        throw std::invalid_argument("stress_degradation: gamma_f must lie in [0, 1]");
    }
    GrayImage out = blur_k ? blur(img, gaussian_kernel(*blur_k)) : img;
    return fourier_perturb(out, gamma_f, rng, opts);
}

// JSON: flat object; the seed is a decimal string so 64-bit values survive any parser.

inline void to_json(nlohmann::json& j, const DegradationSpec& s) {
    j = nlohmann::json{{"applied_blur_noise", s.applied_blur_noise},
                       {"blur_k", s.blur_k},
                       {"noise_family", to_string(s.noise.family)},
                       {"sigma_g", s.noise.sigma_g},
                       {"gamma_f", s.noise.gamma_f},
                       {"enl_L", s.noise.enl_L},
                       {"applied_light_path", s.applied_light_path},
                       {"light_gamma_f", s.light_gamma_f},
                       {"light_blur_k", s.light_blur_k},
                       {"zeta_part_variance", s.zeta_part_variance},
                       {"seed", std::to_string(s.seed)}};
}

inline std::uint64_t parse_seed(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto& str = j.get_ref<const std::string&>();
        if (str.empty() || str.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad seed string '" + str + "'");
        }
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(str, &pos, 10);
        if (pos != str.size()) throw std::invalid_argument("bad seed string '" + str + "'");
        return v;
    }
    return j.get<std::uint64_t>();
}

inline void from_json(const nlohmann::json& j, DegradationSpec& s) {
    s.applied_blur_noise = j.at("applied_blur_noise").get<bool>();
    s.blur_k = j.at("blur_k").get<std::size_t>();
    s.noise.family = parse_noise_family(j.at("noise_family").get<std::string>());
    s.noise.sigma_g = j.at("sigma_g").get<double>();
    s.noise.gamma_f = j.at("gamma_f").get<double>();
    s.noise.enl_L = j.value("enl_L", 1.0);
    s.applied_light_path = j.at("applied_light_path").get<bool>();
    s.light_gamma_f = j.at("light_gamma_f").get<double>();
    s.light_blur_k = j.value("light_blur_k", std::size_t{3});
    s.zeta_part_variance = j.value("zeta_part_variance", FourierOptions{}.zeta_part_variance);
    s.seed = parse_seed(j.at("seed"));
}

inline void to_json(nlohmann::json& j, const AugmentSpec& s) {
    j = nlohmann::json{{"target_resize", s.target_resize},
                       {"rotation_degrees", s.rotation_degrees},
                       {"crop_size", s.crop_size},
                       {"crop_row", s.crop_origin.row},
                       {"crop_col", s.crop_origin.col}};
}

inline void from_json(const nlohmann::json& j, AugmentSpec& s) {
    s.target_resize = j.at("target_resize").get<std::size_t>();
    s.rotation_degrees = j.at("rotation_degrees").get<double>();
    s.crop_size = j.at("crop_size").get<std::size_t>();
    s.crop_origin.row = j.at("crop_row").get<std::size_t>();
    s.crop_origin.col = j.at("crop_col").get<std::size_t>();
}

}  // namespace usdegrade
