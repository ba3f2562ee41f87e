#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "usdegrade/blur.hpp"
#include "usdegrade/degrade.hpp"
#include "usdegrade/image.hpp"
#include "usdegrade/io.hpp"
#include "usdegrade/metrics.hpp"
#include "usdegrade/nllr.hpp"
#include "usdegrade/noise.hpp"
#include "usdegrade/parallel.hpp"
#include "usdegrade/random.hpp"
#include "usdegrade/spectral.hpp"

namespace usdegrade {

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

enum class ImageDomain { natural, ultrasound };

inline std::string to_string(ImageDomain d) { return d == ImageDomain::natural ? "natural" : "ultrasound"; }

inline ImageDomain parse_image_domain(const std::string& s) {
    if (s == "natural") return ImageDomain::natural;
    if (s == "ultrasound") return ImageDomain::ultrasound;
    throw std::invalid_argument("unknown image domain '" + s + "' (natural|ultrasound)");
}

struct NamedImage {
    std::string id;
    GrayImage image;
    ImageDomain domain = ImageDomain::natural;
};

/// Every .png/.pgm directly inside `dir`, sorted by file name; the id is the file stem.
inline std::vector<NamedImage> load_dataset(const std::filesystem::path& dir,
                                            ImageDomain domain = ImageDomain::natural) {
    if (!std::filesystem::is_directory(dir)) throw IoError(dir, "not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<NamedImage> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back({f.stem().string(), load_image(f), domain});
    return out;
}

// ---------------------------------------------------------------------------
// Ladders
// ---------------------------------------------------------------------------

enum class LadderKind { gaussian, speckle, blur };

inline std::string to_string(LadderKind k) {
    switch (k) {
        case LadderKind::gaussian: return "gaussian";
        case LadderKind::speckle: return "speckle";
        case LadderKind::blur: return "blur";
    }
    return "unknown";
}

inline LadderKind parse_ladder_kind(const std::string& s) {
    if (s == "gaussian") return LadderKind::gaussian;
    if (s == "speckle") return LadderKind::speckle;
    if (s == "blur") return LadderKind::blur;
    throw std::invalid_argument("unknown ladder kind '" + s + "' (gaussian|speckle|blur)");
}

/// Severity sweep. gaussian: noise std; speckle: looks L; blur: PSF sigma (0 = no blur).
struct LadderSpec {
    LadderKind kind = LadderKind::gaussian;
    std::vector<double> levels;
    std::size_t seeds_per_image = 1;
    std::string restorer = "identity";

    void validate() const {
        if (levels.empty()) throw std::invalid_argument("LadderSpec: no levels");
        if (seeds_per_image == 0) throw std::invalid_argument("LadderSpec: seeds_per_image must be >= 1");
        for (double v : levels) {
            const bool ok = kind == LadderKind::speckle ? v >= 1.0 : v >= 0.0;
            if (!ok || !std::isfinite(v)) {
                throw std::invalid_argument("LadderSpec: level " + std::to_string(v) + " out of range for " +
                                            to_string(kind));
            }
        }
    }
};

inline std::map<LadderKind, LadderSpec> default_ladders() {
    std::map<LadderKind, LadderSpec> out;
    LadderSpec g{LadderKind::gaussian, {}, 1, "identity"};
    for (int i = 0; i <= 10; ++i) g.levels.push_back(static_cast<double>(i) / 100.0);
    out[LadderKind::gaussian] = g;
    out[LadderKind::speckle] = {LadderKind::speckle, {1, 3, 5, 7, 10, 12, 15, 17, 20, 22, 25}, 1, "identity"};
    out[LadderKind::blur] = {LadderKind::blur, {0, 3, 5, 7, 9, 11, 13, 15}, 1, "identity"};
    return out;
}

/// Corruption operator for one ladder level.
inline GrayImage corrupt(const GrayImage& img, LadderKind kind, double level, RandomStream& rng) {
    switch (kind) {
        case LadderKind::gaussian: return add_gaussian_noise(img, level, rng);
        case LadderKind::speckle: return speckle(img, level, rng);
        case LadderKind::blur: return level == 0.0 ? img : blur(img, kernel_from_sigma(level));
    }
    throw std::logic_error("corrupt: bad ladder kind");
}

struct RowContext {
    LadderKind kind;
    double level;
    std::size_t level_index;
    std::size_t image_index;
    std::string image_id;
    std::size_t seed_index;
};

/// Restoration method under test. restore() must be safe to call concurrently.
class Restorer {
public:
    virtual ~Restorer() = default;
    virtual std::string name() const = 0;
    virtual GrayImage restore(const GrayImage& degraded, const RowContext& ctx) const = 0;
};

class IdentityRestorer final : public Restorer {
public:
    std::string name() const override { return "identity"; }
    GrayImage restore(const GrayImage& degraded, const RowContext&) const override { return degraded; }
};

class NllrRestorer final : public Restorer {
public:
    explicit NllrRestorer(NllrParams params = {}) : params_(params) { params_.validate(); }
    std::string name() const override { return "nllr"; }
    GrayImage restore(const GrayImage& degraded, const RowContext&) const override {
        return nllr_denoise(degraded, params_);
    }

private:
    NllrParams params_;
};

/// Wiener deconvolution with the ladder's own PSF on blur ladders; on noise ladders the
/// PSF is the identity and the filter reduces to a 1/(1+nsr) gain.
class WienerRestorer final : public Restorer {
public:
    explicit WienerRestorer(double nsr = 0.01) : nsr_(nsr) {
        if (!(nsr_ > 0.0)) throw std::invalid_argument("WienerRestorer: nsr must be positive");
    }
    std::string name() const override { return "wiener"; }
    GrayImage restore(const GrayImage& degraded, const RowContext& ctx) const override {
        const BlurKernel k = (ctx.kind == LadderKind::blur && ctx.level > 0.0) ? kernel_from_sigma(ctx.level)
                                                                                 : gaussian_kernel(1);
        return wiener_deblur(degraded, k, nsr_);
    }

private:
    double nsr_;
};

/// Scores precomputed outputs of an external model. Expected file per row:
/// <dir>/<image_id>_<kind>_<level_index>_<seed_index>.png (or .pgm).
class DirectoryRestorer final : public Restorer {
public:
    explicit DirectoryRestorer(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::string name() const override { return "dir:" + dir_.string(); }

    std::filesystem::path expected_stem(const RowContext& ctx) const {
        return dir_ / (ctx.image_id + "_" + to_string(ctx.kind) + "_" + std::to_string(ctx.level_index) + "_" +
                       std::to_string(ctx.seed_index));
    }

    GrayImage restore(const GrayImage&, const RowContext& ctx) const override {
        const auto stem = expected_stem(ctx);
        for (const char* ext : {".png", ".pgm"}) {
            auto candidate = stem;
            candidate += ext;
            if (std::filesystem::exists(candidate)) return load_image(candidate);
        }
        throw IoError(stem.string() + ".png", "missing external output");
    }

private:
    std::filesystem::path dir_;
};

/// identity | nllr | wiener | dir:PATH
inline std::unique_ptr<Restorer> make_restorer(const std::string& name, const NllrParams& nllr = {},
                                               double wiener_nsr = 0.01) {
    if (name == "identity") return std::make_unique<IdentityRestorer>();
    if (name == "nllr") return std::make_unique<NllrRestorer>(nllr);
    if (name == "wiener") return std::make_unique<WienerRestorer>(wiener_nsr);
    if (name.rfind("dir:", 0) == 0 && name.size() > 4) return std::make_unique<DirectoryRestorer>(name.substr(4));
    throw std::invalid_argument("unknown restorer '" + name + "' (identity|nllr|wiener|dir:PATH)");
}

struct LadderRow {
    std::string image_id;
    LadderKind kind = LadderKind::gaussian;
    double level = 0.0;
    std::size_t level_index = 0;
    std::size_t seed = 0;  // seed index within the image/level
    double psnr_in = std::numeric_limits<double>::quiet_NaN();
    double ssim_in = std::numeric_limits<double>::quiet_NaN();
    double psnr_out = std::numeric_limits<double>::quiet_NaN();
    double ssim_out = std::numeric_limits<double>::quiet_NaN();
    std::string error;  // empty when the row succeeded

    bool ok() const noexcept { return error.empty(); }
};

struct LadderReport {
    LadderSpec spec;
    std::uint64_t base_seed = 0;
    std::vector<LadderRow> rows;  // image-major, then level, then seed
};

/// Stream for one ladder row; any row can be reproduced on its own.
inline RandomStream ladder_stream(std::uint64_t base_seed, std::size_t image_index, std::size_t level_index,
                                  std::size_t seed_index) {
    return RandomStream(base_seed, mix_stream_id({image_index, level_index, seed_index}));
}

/// Corrupt, restore and score every (image, level, seed). Row failures are recorded in the
/// row's error field and the run continues.
inline LadderReport run_ladder(const std::vector<NamedImage>& images, const LadderSpec& spec,
                               const Restorer& restorer, std::uint64_t base_seed, std::size_t threads = 1) {
    spec.validate();
    if (images.empty()) throw std::invalid_argument("run_ladder: no images");
    const std::size_t nl = spec.levels.size();
    const std::size_t ns = spec.seeds_per_image;
    LadderReport report{spec, base_seed, std::vector<LadderRow>(images.size() * nl * ns)};
    report.spec.restorer = restorer.name();

    parallel_for(report.rows.size(), threads, [&](std::size_t idx) {
        const std::size_t ii = idx / (nl * ns);
        const std::size_t li = (idx / ns) % nl;
        const std::size_t si = idx % ns;
        LadderRow& row = report.rows[idx];
        row.image_id = images[ii].id;
        row.kind = spec.kind;
        row.level = spec.levels[li];
        row.level_index = li;
        row.seed = si;
        try {
            const GrayImage& clean = images[ii].image;
            RandomStream rng = ladder_stream(base_seed, ii, li, si);
            const GrayImage degraded = corrupt(clean, spec.kind, row.level, rng);
            row.psnr_in = psnr(clean, degraded);
            row.ssim_in = ssim(clean, degraded);
            const RowContext ctx{spec.kind, row.level, li, ii, images[ii].id, si};
            const GrayImage restored = restorer.restore(degraded, ctx);
            row.psnr_out = psnr(clean, restored);
            row.ssim_out = ssim(clean, restored);
        } catch (const std::exception& e) {
            row.error = e.what();
            if (row.error.empty()) row.error = "error";
        }
    });
    return report;
}

struct MetricSummary {
    std::size_t n = 0;          // values that entered mean/std
    std::size_t inf_count = 0;  // +infinity values excluded from mean/std
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and sample standard deviation (0 for a single value). Infinite values are counted
/// separately; if every value is infinite the mean is +infinity.
inline MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    std::vector<double> finite;
    for (double v : values) {
        if (std::isinf(v)) {
            ++s.inf_count;
        } else if (!std::isnan(v)) {
            finite.push_back(v);
        }
    }
    s.n = finite.size();
    if (finite.empty()) {
        if (s.inf_count > 0) s.mean = std::numeric_limits<double>::infinity();
        return s;
    }
    double total = 0.0;
    for (double v : finite) total += v;
    s.mean = total / static_cast<double>(s.n);
    if (s.n == 1) {
        s.std = 0.0;
    } else {
        double ss = 0.0;
        for (double v : finite) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

struct LevelSummary {
    std::size_t level_index = 0;
    double level = 0.0;
    std::size_t rows = 0;
    std::size_t errors = 0;
    MetricSummary psnr_in, ssim_in, psnr_out, ssim_out;
};

/// Per-level summaries in level order. Error rows are counted but not aggregated.
inline std::vector<LevelSummary> aggregate(const LadderReport& report) {
    std::vector<LevelSummary> out(report.spec.levels.size());
    std::vector<std::array<std::vector<double>, 4>> values(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].level_index = i;
        out[i].level = report.spec.levels[i];
    }
    for (const LadderRow& row : report.rows) {
        LevelSummary& s = out.at(row.level_index);
        ++s.rows;
        if (!row.ok()) {
            ++s.errors;
            continue;
        }
        auto& v = values[row.level_index];
        v[0].push_back(row.psnr_in);
        v[1].push_back(row.ssim_in);
        v[2].push_back(row.psnr_out);
        v[3].push_back(row.ssim_out);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].psnr_in = summarize(values[i][0]);
        out[i].ssim_in = summarize(values[i][1]);
        out[i].psnr_out = summarize(values[i][2]);
        out[i].ssim_out = summarize(values[i][3]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report serialisation
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal; infinities as inf / -inf, NaN as nan.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += (ch == '\n' || ch == '\r') ? ' ' : ch;
    }
    return out + "\"";
}

inline constexpr const char* kLadderCsvHeader =
    "image_id,kind,level,seed,psnr_in,ssim_in,psnr_out,ssim_out,error";

inline std::string ladder_csv(const LadderReport& report) {
    std::ostringstream out;
    out << kLadderCsvHeader << '\n';
    for (const LadderRow& r : report.rows) {
        out << csv_field(r.image_id) << ',' << to_string(r.kind) << ',' << format_number(r.level) << ','
            << r.seed << ',';
        if (r.ok()) {
            out << format_number(r.psnr_in) << ',' << format_number(r.ssim_in) << ','
                << format_number(r.psnr_out) << ',' << format_number(r.ssim_out) << ",\n";
        } else {
            out << ",,,," << csv_field(r.error) << '\n';
        }
    }
    return out.str();
}

inline nlohmann::json to_json_value(const MetricSummary& s) {
    return {{"mean", json_number(s.mean)}, {"std", json_number(s.std)}, {"n", s.n}, {"inf_count", s.inf_count}};
}

inline void to_json(nlohmann::json& j, const LadderSpec& s) {
    j = nlohmann::json{{"kind", to_string(s.kind)},
                       {"levels", s.levels},
                       {"seeds_per_image", s.seeds_per_image},
                       {"restorer", s.restorer}};
}

inline nlohmann::json ladder_json(const LadderReport& report) {
    nlohmann::json levels = nlohmann::json::array();
    for (const LevelSummary& s : aggregate(report)) {
        levels.push_back({{"level_index", s.level_index},
                          {"level", s.level},
                          {"rows", s.rows},
                          {"errors", s.errors},
                          {"psnr_in", to_json_value(s.psnr_in)},
                          {"ssim_in", to_json_value(s.ssim_in)},
                          {"psnr_out", to_json_value(s.psnr_out)},
                          {"ssim_out", to_json_value(s.ssim_out)}});
    }
    return {{"spec", report.spec},
            {"base_seed", std::to_string(report.base_seed)},
            {"rows", report.rows.size()},
            {"aggregates", levels}};
}

// ---------------------------------------------------------------------------
// Training pairs
// ---------------------------------------------------------------------------

struct PairOptions {
    std::size_t target_resize = 128;
    std::size_t crop_size = 64;
    CompositionConfig composition{};
    NllrParams nllr{};
    std::size_t threads = 1;
};

/// One training triple plus everything needed to regenerate it from the source image.
struct PairRecord {
    std::string image_id;
    std::size_t index = 0;
    ImageDomain domain = ImageDomain::natural;
    AugmentSpec augment{};
    DegradationSpec degradation{};
    NllrParams nllr{};
    GrayImage input{1, 1};
    GrayImage target{1, 1};
};

inline nlohmann::json pair_spec_json(const PairRecord& rec) {
    nlohmann::json j{{"image_id", rec.image_id},
                     {"index", rec.index},
                     {"domain", to_string(rec.domain)},
                     {"augment", rec.augment},
                     {"degradation", rec.degradation}};
    if (rec.domain == ImageDomain::ultrasound) j["nllr"] = rec.nllr;
    return j;
}

/// Target: the augmented patch for natural images, its NLLR-denoised version for ultrasound.
inline GrayImage pair_target(const GrayImage& patch, ImageDomain domain, const NllrParams& nllr) {
    return domain == ImageDomain::natural ? patch : nllr_denoise(patch, nllr);
}

/// Rebuilds (input, target) from the source image and a spec produced by pair_spec_json.
inline std::pair<GrayImage, GrayImage> replay_pair(const GrayImage& source, const nlohmann::json& spec) {
    const auto augment = spec.at("augment").get<AugmentSpec>();
    const auto degradation = spec.at("degradation").get<DegradationSpec>();
    const ImageDomain domain = parse_image_domain(spec.at("domain").get<std::string>());
    const NllrParams nllr = spec.contains("nllr") ? spec.at("nllr").get<NllrParams>() : NllrParams{};
    const GrayImage patch = augment_patch(source, augment);
    return {apply_degradation(patch, degradation), pair_target(patch, domain, nllr)};
}

struct PairSummary {
    std::size_t images = 0;
    std::size_t pairs = 0;
    std::vector<std::string> errors;  // "<image_id>: <message>"
};

using PairSink = std::function<void(const PairRecord&)>;

/// Emits count_per_image triples per image. Pair k of image i draws from
/// RandomStream(base_seed, mix(i, k)): first the augmentation, then the degradation.
/// The sink is called from the calling thread in (image, k) order.
inline PairSummary emit_pair_dataset(const std::vector<NamedImage>& images, std::size_t count_per_image,
                                     std::uint64_t base_seed, const PairSink& sink,
                                     const PairOptions& opts = {}) {
    PairSummary summary;
    summary.images = images.size();
    for (std::size_t ii = 0; ii < images.size(); ++ii) {
        const NamedImage& src = images[ii];
        std::vector<std::optional<PairRecord>> batch(count_per_image);
        std::vector<std::string> failures(count_per_image);
        parallel_for(count_per_image, opts.threads, [&](std::size_t k) {
            try {
                RandomStream rng(base_seed, mix_stream_id({ii, k}));
                PairRecord rec;
                rec.image_id = src.id;
                rec.index = k;
                rec.domain = src.domain;
                rec.nllr = opts.nllr;
                rec.augment = draw_augment_spec(rng, opts.target_resize, opts.crop_size);
                rec.degradation = draw_training_degradation(rng, opts.composition);
                const GrayImage patch = augment_patch(src.image, rec.augment);
                rec.target = pair_target(patch, src.domain, opts.nllr);
                rec.input = apply_degradation(patch, rec.degradation);
                batch[k] = std::move(rec);
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        });
        for (std::size_t k = 0; k < count_per_image; ++k) {
            if (batch[k]) {
                sink(*batch[k]);
                ++summary.pairs;
            } else {
                summary.errors.push_back(src.id + ": " + failures[k]);
            }
        }
    }
    return summary;
}

/// Writes <id>_<k>_input.png, <id>_<k>_target.png and <id>_<k>_spec.json into a directory.
class DirectoryPairWriter {
public:
    explicit DirectoryPairWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void operator()(const PairRecord& rec) const {
        const std::string stem = rec.image_id + "_" + std::to_string(rec.index);
        save_image(rec.input, dir_ / (stem + "_input.png"));
        save_image(rec.target, dir_ / (stem + "_target.png"));
        std::ofstream js(dir_ / (stem + "_spec.json"));
        js << pair_spec_json(rec).dump(2) << '\n';
        if (!js) throw IoError(dir_ / (stem + "_spec.json"), "write failed");
    }

private:
    std::filesystem::path dir_;
};

}  // namespace usdegrade
