// usdegrade: command-line front end (degrade, augment, nllr, metrics, profile, ladder,
// pairs, replay). Run `usdegrade --help` or `usdegrade <command> --help`.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "usdegrade/bench.hpp"
#include "usdegrade/degrade.hpp"
#include "usdegrade/io.hpp"
#include "usdegrade/metrics.hpp"
#include "usdegrade/nllr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace usdegrade;

namespace {

constexpr const char* kThreadsEnv = "US_DEGRADE_THREADS";

std::size_t parse_threads(const std::string& s) {
    if (s == "auto") return auto_threads();
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size() || v < 1) throw std::invalid_argument("threads must be a positive integer or 'auto'");
    return static_cast<std::size_t>(v);
}

std::string threads_validator(const std::string& s) {
    try {
        parse_threads(s);
        return {};
    } catch (const std::exception&) {
        return "threads must be a positive integer or 'auto', got '" + s + "'";
    }
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError(path, "write failed");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError(path, "write failed");
}

/// Sidecar next to an output file: out.png -> out_<suffix>.json
fs::path sidecar(const fs::path& out, const std::string& suffix) {
    return out.parent_path() / (out.stem().string() + "_" + suffix + ".json");
}

RoiSpec parse_roi(const std::string& text, ProfileAxis axis) {
    // r0:r1,c0:c1 (zero-based, half-open)
    RoiSpec roi;
    char sep1 = 0, comma = 0, sep2 = 0;
    std::istringstream in(text);
    in >> roi.r0 >> sep1 >> roi.r1 >> comma >> roi.c0 >> sep2 >> roi.c1;
    if (!in || sep1 != ':' || comma != ',' || sep2 != ':' || in.peek() != EOF) {
        throw std::invalid_argument("--roi must look like r0:r1,c0:c1, got '" + text + "'");
    }
    roi.axis = axis;
    return roi;
}

// ---------------------------------------------------------------------------
// --config: JSON {"command": NAME, "threads": ..., NAME: {flag: value, ...}} is expanded into
// ordinary arguments. Flags given on the command line win over the file.
// ---------------------------------------------------------------------------

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

std::string scalar_token(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::vector<std::string> expand_config(std::vector<std::string> args, const std::set<std::string>& commands) {
    std::optional<fs::path> config;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (!config) return args;

    std::ifstream in(*config);
    if (!in) throw IoError(*config, "cannot open config");
    const json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::invalid_argument("config root must be a JSON object");

    // Locate the subcommand on the command line, or take it from the file.
    std::string command;
    std::size_t command_pos = args.size();
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (commands.count(args[i])) {
            command = args[i];
            command_pos = i;
            break;
        }
    }
    if (command.empty()) {
        if (!cfg.contains("command")) throw std::invalid_argument("no command given and config has no 'command'");
        command = cfg.at("command").get<std::string>();
        if (!commands.count(command)) throw std::invalid_argument("config names unknown command '" + command + "'");
        args.push_back(command);
        command_pos = args.size() - 1;
    }

    std::vector<std::string> global(args.begin() + 1, args.begin() + static_cast<long>(command_pos));
    std::vector<std::string> local(args.begin() + static_cast<long>(command_pos) + 1, args.end());

    std::vector<std::string> extra_global;
    if (cfg.contains("threads") && !flag_given(global, "--threads") && !std::getenv(kThreadsEnv)) {
        extra_global = {"--threads", scalar_token(cfg.at("threads"))};
    }
    std::vector<std::string> extra_local;
    if (cfg.contains(command)) {
        for (const auto& [key, value] : cfg.at(command).items()) {
            const std::string flag = "--" + key;
            if (flag_given(local, flag) || value.is_null()) continue;
            if (value.is_boolean()) {
                if (value.get<bool>()) extra_local.push_back(flag);
            } else if (value.is_array()) {
                if (value.empty()) continue;
                std::string joined;
                for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar_token(item);
                extra_local.insert(extra_local.end(), {flag, joined});
            } else {
                extra_local.insert(extra_local.end(), {flag, scalar_token(value)});
            }
        }
    }

    std::vector<std::string> out{args[0]};
    out.insert(out.end(), extra_global.begin(), extra_global.end());
    out.insert(out.end(), global.begin(), global.end());
    out.push_back(command);
    out.insert(out.end(), extra_local.begin(), extra_local.end());
    out.insert(out.end(), local.begin(), local.end());
    return out;
}

// ---------------------------------------------------------------------------
// Subcommand settings. Each knows how to echo itself as config JSON.
// ---------------------------------------------------------------------------

struct DegradeArgs {
    std::string in, out;
    std::uint64_t seed = 0;
    std::optional<std::size_t> blur_k;
    std::optional<double> blur_sigma, gauss_sigma, fourier_gamma, speckle_L;
    bool train_draw = false;

    json config() const {
        json j{{"in", in}, {"out", out}, {"seed", seed}, {"train-draw", train_draw}};
        if (blur_k) j["blur-k"] = *blur_k;
        if (blur_sigma) j["blur-sigma"] = *blur_sigma;
        if (gauss_sigma) j["gauss-sigma"] = *gauss_sigma;
        if (fourier_gamma) j["fourier-gamma"] = *fourier_gamma;
        if (speckle_L) j["speckle-L"] = *speckle_L;
        return j;
    }
};

struct AugmentArgs {
    std::string in, out;
    std::uint64_t seed = 0;
    std::size_t resize = 128, crop = 64;
    json config() const { return {{"in", in}, {"out", out}, {"seed", seed}, {"resize", resize}, {"crop", crop}}; }
};

void add_nllr_options(CLI::App* app, NllrParams& p) {
    app->add_option("--patch", p.patch_size, "Patch side length")->capture_default_str();
    app->add_option("--stride", p.stride, "Reference grid stride")->capture_default_str();
    app->add_option("--search", p.search_radius, "Search radius (window 2r+1)")->capture_default_str();
    app->add_option("--group", p.group_size, "Patches per group")->capture_default_str();
    app->add_option("--lambda", p.shrink_lambda, "Shrinkage multiplier")->capture_default_str();
    app->add_option("--iters", p.iterations, "Iterations")->capture_default_str();
    app->add_option("--delta", p.relax_delta, "Relaxation weight for iterations > 1")->capture_default_str();
}

json nllr_config(const NllrParams& p) {
    return {{"patch", p.patch_size}, {"stride", p.stride}, {"search", p.search_radius}, {"group", p.group_size},
            {"lambda", p.shrink_lambda}, {"iters", p.iterations}, {"delta", p.relax_delta}};
}

struct NllrArgs {
    std::string in, out;
    NllrParams params;
    json config() const {
        json j = nllr_config(params);
        j["in"] = in;
        j["out"] = out;
        return j;
    }
};

struct MetricsArgs {
    std::string ref, test, ssim_window = "uniform7";
    bool as_json = false, round_to_byte = false;
};

struct ProfileArgs {
    std::string in, roi = "0:200,194:200", axis = "rows", fwhm_mode = "interpolated", csv;
    bool as_json = false;
};

struct LadderArgs {
    std::string dataset, kind = "gaussian", restorer = "identity", out;
    std::size_t seeds = 1;
    std::vector<double> levels;
    std::uint64_t seed = 0;
    double nsr = 0.01;
    NllrParams nllr;

    json config() const {
        json j = nllr_config(nllr);
        j.update({{"dataset", dataset}, {"kind", kind}, {"restorer", restorer}, {"out", out}, {"seeds", seeds},
                  {"levels", levels}, {"seed", seed}, {"nsr", nsr}});
        return j;
    }
};

struct PairsArgs {
    std::string dataset, kind = "natural", out;
    std::size_t per_image = 1, resize = 128, crop = 64;
    std::uint64_t seed = 0;
    NllrParams nllr;

    json config() const {
        json j = nllr_config(nllr);
        j.update({{"dataset", dataset}, {"kind", kind}, {"out", out}, {"per-image", per_image}, {"seed", seed},
                  {"resize", resize}, {"crop", crop}});
        return j;
    }
};

struct ReplayArgs {
    std::string source, spec, out_input, out_target;
};

json echo(const std::string& command, std::size_t threads, const json& sub) {
    return {{"command", command}, {"threads", threads}, {command, sub}};
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

int run_degrade(const DegradeArgs& a, std::size_t threads) {
    const GrayImage img = load_image(a.in);
    json spec;
    GrayImage out = img;
    if (a.train_draw) {
        RandomStream draw(a.seed, 0);
        const DegradationSpec d = draw_training_degradation(draw);
        out = apply_degradation(img, d);
        spec = {{"mode", "train"}, {"degradation", d}};
    } else {
        // Stress order: blur, fourier, additive gaussian, speckle. Every step clips.
        RandomStream rng(a.seed, 0);
        spec = {{"mode", "stress"}, {"seed", std::to_string(a.seed)}};
        if (a.blur_k) {
            out = blur(out, gaussian_kernel(*a.blur_k));
            spec["blur_k"] = *a.blur_k;
        } else if (a.blur_sigma && *a.blur_sigma > 0.0) {
            out = blur(out, kernel_from_sigma(*a.blur_sigma));
            spec["blur_sigma"] = *a.blur_sigma;
        }
        if (a.fourier_gamma) {
            out = fourier_perturb(out, *a.fourier_gamma, rng);
            spec["fourier_gamma"] = *a.fourier_gamma;
        }
        if (a.gauss_sigma) {
            out = add_gaussian_noise(out, *a.gauss_sigma, rng);
            spec["gauss_sigma"] = *a.gauss_sigma;
        }
        if (a.speckle_L) {
            out = speckle(out, *a.speckle_L, rng);
            spec["speckle_L"] = *a.speckle_L;
        }
    }
    save_image(out, a.out);
    write_json(sidecar(a.out, "spec"), spec);
    write_json(sidecar(a.out, "config"), echo("degrade", threads, a.config()));
    return 0;
}

int run_augment(const AugmentArgs& a, std::size_t threads) {
    const GrayImage img = load_image(a.in);
    RandomStream rng(a.seed, 0);
    const AugmentSpec spec = draw_augment_spec(rng, a.resize, a.crop);
    save_image(augment_patch(img, spec), a.out);
    write_json(sidecar(a.out, "spec"), json(spec));
    write_json(sidecar(a.out, "config"), echo("augment", threads, a.config()));
    return 0;
}

int run_nllr(const NllrArgs& a, std::size_t threads) {
    save_image(nllr_denoise(load_image(a.in), a.params), a.out);
    write_json(sidecar(a.out, "config"), echo("nllr", threads, a.config()));
    return 0;
}

int run_metrics(const MetricsArgs& a) {
    const GrayImage ref = load_image(a.ref);
    const GrayImage test = load_image(a.test);
    SsimOptions so;
    so.window = a.ssim_window == "gaussian11" ? SsimWindow::gaussian11 : SsimWindow::uniform7;
    const QualityReport q{psnr(ref, test, {a.round_to_byte}), ssim(ref, test, so)};
    if (a.as_json) {
        std::cout << json(q).dump(2) << '\n';
    } else {
        std::cout << "psnr_db " << format_number(q.psnr_db) << "\nssim " << format_number(q.ssim) << '\n';
    }
    return 0;
}

int run_profile(const ProfileArgs& a) {
    const GrayImage img = load_image(a.in);
    const RoiSpec roi = parse_roi(a.roi, a.axis == "cols" ? ProfileAxis::along_cols : ProfileAxis::along_rows);
    const Profile p = extract_profile(img, roi);
    const auto mode = a.fwhm_mode == "count" ? FwhmMode::sample_count : FwhmMode::interpolated;
    const ResolutionReport r = resolution_report(p, mode);
    if (!a.csv.empty()) {
        std::string csv = "index,value\n";
        for (std::size_t i = 0; i < p.size(); ++i) csv += std::to_string(i) + "," + format_number(p[i]) + "\n";
        write_text(a.csv, csv);
    }
    if (a.as_json) {
        std::cout << json(r).dump(2) << '\n';
    } else {
        const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
        std::cout << "fwhm_px " << opt(r.fwhm_px) << "\ngrad_mean " << format_number(r.grad_mean) << " ("
                  << to_string(r.band_grad_mean) << ")\ngrad_max " << format_number(r.grad_max) << " ("
                  << to_string(r.band_grad_max) << ")\ncontrast " << opt(r.contrast) << " ("
                  << to_string(r.band_contrast) << ")\n";
    }
    return 0;
}

int run_ladder_cmd(const LadderArgs& a, std::size_t threads) {
    const auto images = load_dataset(a.dataset, ImageDomain::ultrasound);
    if (images.empty()) throw std::invalid_argument("no .png/.pgm images in " + a.dataset);
    LadderSpec spec = default_ladders().at(parse_ladder_kind(a.kind));
    if (!a.levels.empty()) spec.levels = a.levels;
    spec.seeds_per_image = a.seeds;
    const auto restorer = make_restorer(a.restorer, a.nllr, a.nsr);
    const LadderReport report = run_ladder(images, spec, *restorer, a.seed, threads);

    const fs::path out(a.out);
    fs::create_directories(out);
    write_text(out / ("ladder_" + a.kind + ".csv"), ladder_csv(report));
    write_json(out / ("ladder_" + a.kind + ".json"), ladder_json(report));
    write_json(out / "config.json", echo("ladder", threads, a.config()));

    std::size_t failed = 0;
    for (const auto& row : report.rows) failed += !row.ok();
    if (failed) std::cerr << failed << " of " << report.rows.size() << " rows failed\n";
    return failed == report.rows.size() ? 1 : 0;
}

int run_pairs(const PairsArgs& a, std::size_t threads) {
    const auto images = load_dataset(a.dataset, parse_image_domain(a.kind));
    if (images.empty()) throw std::invalid_argument("no .png/.pgm images in " + a.dataset);
    PairOptions opts;
    opts.target_resize = a.resize;
    opts.crop_size = a.crop;
    opts.nllr = a.nllr;
    opts.threads = threads;
    DirectoryPairWriter writer(a.out);
    const PairSummary s = emit_pair_dataset(images, a.per_image, a.seed, std::ref(writer), opts);
    write_json(fs::path(a.out) / "config.json", echo("pairs", threads, a.config()));
    for (const auto& e : s.errors) std::cerr << "error: " << e << '\n';
    std::cerr << s.pairs << " pairs from " << s.images << " images\n";
    return s.pairs == 0 && !s.errors.empty() ? 1 : 0;
}

int run_replay(const ReplayArgs& a) {
    std::ifstream in(a.spec);
    if (!in) throw IoError(a.spec, "cannot open spec");
    const auto [input, target] = replay_pair(load_image(a.source), json::parse(in));
    save_image(input, a.out_input);
    if (!a.out_target.empty()) save_image(target, a.out_target);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ultrasound degradation, denoising and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config();  // disable CLI11's own config handling; --config is expanded below
    app.add_option("--config", "JSON config file (command line flags take precedence)");

    std::string threads_text = "auto";
    app.add_option("--threads", threads_text, "Worker threads: N or auto")
        ->envname(kThreadsEnv)
        ->check(CLI::Validator(threads_validator, "N|auto"))
        ->capture_default_str();

    DegradeArgs dg;
    auto* degrade = app.add_subcommand("degrade", "Apply a stress corruption or one training draw");
    degrade->add_option("--in", dg.in, "Input image")->required();
    degrade->add_option("--out", dg.out, "Output image (.png/.pgm)")->required();
    degrade->add_option("--seed", dg.seed, "Random seed")->capture_default_str();
    auto* bk = degrade->add_option("--blur-k", dg.blur_k, "Gaussian blur kernel size (odd)");
    degrade->add_option("--blur-sigma", dg.blur_sigma, "Gaussian blur sigma (0 = none)")->excludes(bk);
    degrade->add_option("--gauss-sigma", dg.gauss_sigma, "Additive Gaussian noise std")->check(CLI::NonNegativeNumber);
    degrade->add_option("--fourier-gamma", dg.fourier_gamma, "Fourier perturbation gamma")->check(CLI::Range(0.0, 1.0));
    degrade->add_option("--speckle-L", dg.speckle_L, "Speckle equivalent number of looks")->check(CLI::Range(1.0, 1e12));
    degrade->add_flag("--train-draw", dg.train_draw, "Draw a training composition from --seed instead");

    AugmentArgs ag;
    auto* augment = app.add_subcommand("augment", "Resize, rotate and crop with seed-drawn parameters");
    augment->add_option("--in", ag.in, "Input image")->required();
    augment->add_option("--out", ag.out, "Output patch")->required();
    augment->add_option("--seed", ag.seed, "Random seed")->capture_default_str();
    augment->add_option("--resize", ag.resize, "Square resize side")->capture_default_str();
    augment->add_option("--crop", ag.crop, "Square crop side")->capture_default_str();

    NllrArgs nl;
    auto* nllr = app.add_subcommand("nllr", "Non-local low-rank denoising");
    nllr->add_option("--in", nl.in, "Input image")->required();
    nllr->add_option("--out", nl.out, "Output image")->required();
    add_nllr_options(nllr, nl.params);

    MetricsArgs mt;
    auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of --test against --ref");
    metrics->add_option("--ref", mt.ref, "Reference image")->required();
    metrics->add_option("--test", mt.test, "Test image")->required();
    metrics->add_flag("--json", mt.as_json, "Print JSON");
    metrics->add_option("--ssim-window", mt.ssim_window, "uniform7 or gaussian11")
        ->check(CLI::IsMember({"uniform7", "gaussian11"}))
        ->capture_default_str();
    metrics->add_flag("--round-to-byte", mt.round_to_byte, "Round to integers before the PSNR MSE");

    ProfileArgs pf;
    auto* profile = app.add_subcommand("profile", "Resolution metrics of an ROI intensity profile");
    profile->add_option("--in", pf.in, "Input image")->required();
    profile->add_option("--roi", pf.roi, "r0:r1,c0:c1, zero-based half-open")->capture_default_str();
    profile->add_option("--axis", pf.axis, "rows: one sample per ROI row; cols: per column")
        ->check(CLI::IsMember({"rows", "cols"}))
        ->capture_default_str();
    profile->add_option("--fwhm-mode", pf.fwhm_mode, "interpolated or count")
        ->check(CLI::IsMember({"interpolated", "count"}))
        ->capture_default_str();
    profile->add_option("--csv", pf.csv, "Write the profile samples as CSV");
    profile->add_flag("--json", pf.as_json, "Print JSON");

    LadderArgs ld;
    auto* ladder = app.add_subcommand("ladder", "Corrupt/restore/score sweep over a dataset");
    ladder->add_option("--dataset", ld.dataset, "Directory of .png/.pgm images")->required();
    ladder->add_option("--kind", ld.kind, "gaussian, speckle or blur")
        ->check(CLI::IsMember({"gaussian", "speckle", "blur"}))
        ->capture_default_str();
    ladder->add_option("--restorer", ld.restorer, "identity, nllr, wiener or dir:PATH")->capture_default_str();
    ladder->add_option("--seeds", ld.seeds, "Seeds per image and level")->check(CLI::PositiveNumber)->capture_default_str();
    ladder->add_option("--levels", ld.levels, "Comma-separated levels (default: built-in ladder)")->delimiter(',');
    ladder->add_option("--seed", ld.seed, "Base seed")->capture_default_str();
    ladder->add_option("--nsr", ld.nsr, "Wiener noise-to-signal ratio")->capture_default_str();
    ladder->add_option("--out", ld.out, "Output directory")->required();
    add_nllr_options(ladder, ld.nllr);

    PairsArgs pr;
    auto* pairs = app.add_subcommand("pairs", "Emit (input, target, spec) training triples");
    pairs->add_option("--dataset", pr.dataset, "Directory of .png/.pgm images")->required();
    pairs->add_option("--kind", pr.kind, "natural or ultrasound")
        ->check(CLI::IsMember({"natural", "ultrasound"}))
        ->capture_default_str();
    pairs->add_option("--per-image", pr.per_image, "Pairs per image")->capture_default_str();
    pairs->add_option("--seed", pr.seed, "Base seed")->capture_default_str();
    pairs->add_option("--resize", pr.resize, "Square resize side")->capture_default_str();
    pairs->add_option("--crop", pr.crop, "Square crop side")->capture_default_str();
    pairs->add_option("--out", pr.out, "Output directory")->required();
    add_nllr_options(pairs, pr.nllr);

    ReplayArgs rp;
    auto* replay = app.add_subcommand("replay", "Regenerate a training pair from its spec JSON");
    replay->add_option("--source", rp.source, "Original image")->required();
    replay->add_option("--spec", rp.spec, "<id>_<k>_spec.json")->required();
    replay->add_option("--out-input", rp.out_input, "Degraded input output path")->required();
    replay->add_option("--out-target", rp.out_target, "Target output path");

    const std::set<std::string> commands{"degrade", "augment", "nllr", "metrics", "profile", "ladder", "pairs", "replay"};
    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args), commands);
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        const std::size_t threads = parse_threads(threads_text);
        if (*degrade) return run_degrade(dg, threads);
        if (*augment) return run_augment(ag, threads);
        if (*nllr) return run_nllr(nl, threads);
        if (*metrics) return run_metrics(mt);
        if (*profile) return run_profile(pf);
        if (*ladder) return run_ladder_cmd(ld, threads);
        if (*pairs) return run_pairs(pr, threads);
        if (*replay) return run_replay(rp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
