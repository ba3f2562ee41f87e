#include <gtest/gtest.h>

#include <filesystem>

#include "usdegrade/bench.hpp"
#include "usdegrade/phantom.hpp"

using namespace usdegrade;
namespace fs = std::filesystem;

namespace {
std::vector<NamedImage> phantoms(std::size_t n, std::size_t size = 48,
                                 ImageDomain domain = ImageDomain::natural) {
    std::vector<NamedImage> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({"ph" + std::to_string(i), phantom::piecewise_constant(size, size, unsigned(i)), domain});
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(USDEGRADE_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST(DefaultLadders, LevelSets) {
    const auto d = default_ladders();
    const auto& sp = d.at(LadderKind::speckle).levels;
    EXPECT_EQ(sp.size(), 11u);
    EXPECT_EQ(sp.front(), 1.0);
    EXPECT_EQ(sp.back(), 25.0);
    EXPECT_EQ(d.at(LadderKind::blur).levels, (std::vector<double>{0, 3, 5, 7, 9, 11, 13, 15}));
    const auto& g = d.at(LadderKind::gaussian).levels;
    EXPECT_EQ(g.size(), 11u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g.back(), 0.10);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(LadderSpec, Validation) {
    EXPECT_THROW((LadderSpec{LadderKind::speckle, {0.5}}.validate()), std::invalid_argument);
    EXPECT_THROW((LadderSpec{LadderKind::gaussian, {-0.1}}.validate()), std::invalid_argument);
    EXPECT_THROW((LadderSpec{LadderKind::blur, {}}.validate()), std::invalid_argument);
    EXPECT_THROW((LadderSpec{LadderKind::blur, {1}, 0}.validate()), std::invalid_argument);
}

TEST(RunLadder, IdentityAtZeroSigma) {
    const auto imgs = phantoms(2);
    const LadderReport rep = run_ladder(imgs, {LadderKind::gaussian, {0.0, 0.05}, 2}, IdentityRestorer{}, 1);
    ASSERT_EQ(rep.rows.size(), 2u * 2u * 2u);
    for (const auto& row : rep.rows) {
        ASSERT_TRUE(row.ok()) << row.error;
        EXPECT_EQ(row.psnr_in, row.psnr_out);
        EXPECT_EQ(row.ssim_in, row.ssim_out);
        if (row.level == 0.0) {
            EXPECT_TRUE(std::isinf(row.psnr_in));
            EXPECT_NEAR(row.ssim_in, 1.0, 1e-12);
        }
    }
}

TEST(RunLadder, RowsReproducibleInIsolation) {
    const auto imgs = phantoms(3);
    const LadderSpec spec{LadderKind::speckle, {1, 5, 10}, 2};
    const LadderReport rep = run_ladder(imgs, spec, IdentityRestorer{}, 77);
    const LadderRow& row = rep.rows[1 * 6 + 2 * 2 + 1];  // image 1, level 2, seed 1
    RandomStream rng = ladder_stream(77, 1, 2, 1);
    const GrayImage degraded = corrupt(imgs[1].image, LadderKind::speckle, 10, rng);
    EXPECT_EQ(row.psnr_in, psnr(imgs[1].image, degraded));
}

TEST(RunLadder, ThreadCountIndependent) {
    const auto imgs = phantoms(3);
    const LadderSpec spec{LadderKind::blur, {0, 1.5, 3}, 3};
    const std::string a = ladder_csv(run_ladder(imgs, spec, IdentityRestorer{}, 5, 1));
    const std::string b = ladder_csv(run_ladder(imgs, spec, IdentityRestorer{}, 5, 4));
    EXPECT_EQ(a, b);
}

TEST(RunLadder, NllrBeatsInputOnSpeckle) {
    const auto imgs = phantoms(2, 64);
    const LadderReport rep = run_ladder(imgs, {LadderKind::speckle, {5}, 2}, NllrRestorer{}, 3);
    const auto agg = aggregate(rep);
    EXPECT_GT(agg[0].psnr_out.mean, agg[0].psnr_in.mean);
}

TEST(RunLadder, WienerOnBlurLadder) {
    const auto imgs = phantoms(1, 64);
    const LadderReport rep = run_ladder(imgs, {LadderKind::blur, {0, 1.0}, 1}, WienerRestorer{0.01}, 3);
    for (const auto& r : rep.rows) EXPECT_TRUE(r.ok()) << r.error;
}

TEST(RunLadder, MissingExternalOutputIsRowError) {
    const auto imgs = phantoms(2, 32);
    const fs::path dir = scratch("ext");
    const LadderSpec spec{LadderKind::gaussian, {0.0, 0.02}, 1};
    // Provide outputs for image 0 only.
    for (std::size_t li = 0; li < 2; ++li)
        save_image(imgs[0].image, dir / ("ph0_gaussian_" + std::to_string(li) + "_0.png"));
    const DirectoryRestorer ext(dir);
    const LadderReport rep = run_ladder(imgs, spec, ext, 9);
    std::size_t errors = 0;
    for (const auto& r : rep.rows) {
        if (r.image_id == "ph0") {
            EXPECT_TRUE(r.ok()) << r.error;
            EXPECT_GT(r.psnr_out, 40.0);  // clean phantom, 8-bit quantised
        } else {
            EXPECT_FALSE(r.ok());
            ++errors;
        }
    }
    EXPECT_EQ(errors, 2u);
    const auto agg = aggregate(rep);
    EXPECT_EQ(agg[1].errors, 1u);
    EXPECT_NE(ladder_csv(rep).find("missing external output"), std::string::npos);
}

TEST(RunLadder, DimensionMismatchIsRowError) {
    const auto imgs = phantoms(1, 32);
    const fs::path dir = scratch("ext_dims");
    save_image(GrayImage(16, 16, 0.5), dir / "ph0_blur_0_0.pgm");
    const LadderReport rep = run_ladder(imgs, {LadderKind::blur, {0}, 1}, DirectoryRestorer(dir), 1);
    ASSERT_FALSE(rep.rows[0].ok());
    EXPECT_NE(rep.rows[0].error.find("dimensions"), std::string::npos);
}

TEST(Aggregate, MeanStdConventions) {
    EXPECT_EQ(summarize({5.0}).std, 0.0);
    const MetricSummary two = summarize({30.0, 34.0});
    EXPECT_EQ(two.mean, 32.0);
    EXPECT_NEAR(two.std, 2.828427, 1e-6);
    const MetricSummary infs = summarize({INFINITY, INFINITY, INFINITY});
    EXPECT_TRUE(std::isinf(infs.mean));
    EXPECT_EQ(infs.inf_count, 3u);
    EXPECT_EQ(infs.n, 0u);
    const MetricSummary mixed = summarize({INFINITY, 20.0, 22.0});
    EXPECT_EQ(mixed.mean, 21.0);
    EXPECT_EQ(mixed.inf_count, 1u);
}

TEST(Aggregate, RecomputableFromRows) {
    const auto imgs = phantoms(2);
    const LadderReport rep = run_ladder(imgs, {LadderKind::gaussian, {0.03}, 3}, IdentityRestorer{}, 4);
    double total = 0;
    for (const auto& r : rep.rows) total += r.ssim_out;
    EXPECT_NEAR(aggregate(rep)[0].ssim_out.mean, total / 6.0, 1e-15);
}

TEST(LadderCsv, HeaderAndInf) {
    const auto imgs = phantoms(1, 16);
    const LadderReport rep = run_ladder(imgs, {LadderKind::gaussian, {0.0}, 1}, IdentityRestorer{}, 1);
    const std::string csv = ladder_csv(rep);
    EXPECT_EQ(csv.rfind("image_id,kind,level,seed,psnr_in,ssim_in,psnr_out,ssim_out,error\n", 0), 0u);
    EXPECT_NE(csv.find("ph0,gaussian,0,0,inf,1,inf,1,\n"), std::string::npos) << csv;
    const nlohmann::json j = ladder_json(rep);
    EXPECT_EQ(j.at("aggregates")[0].at("psnr_in").at("mean"), "inf");
    EXPECT_EQ(j.at("spec").at("kind"), "gaussian");
    EXPECT_EQ(j.at("spec").at("restorer"), "identity");
}

TEST(CsvField, Escaping) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(MakeRestorer, Names) {
    EXPECT_EQ(make_restorer("identity")->name(), "identity");
    EXPECT_EQ(make_restorer("nllr")->name(), "nllr");
    EXPECT_EQ(make_restorer("wiener")->name(), "wiener");
    EXPECT_EQ(make_restorer("dir:/tmp/x")->name(), "dir:/tmp/x");
    EXPECT_THROW(make_restorer("bm3d"), std::invalid_argument);
}

TEST(PairDataset, CountsAndDeterminism) {
    auto imgs = phantoms(10, 64);
    std::vector<PairRecord> first, second;
    const auto s1 = emit_pair_dataset(imgs, 4, 11, [&](const PairRecord& r) { first.push_back(r); });
    PairOptions opts;
    opts.threads = 3;
    emit_pair_dataset(imgs, 4, 11, [&](const PairRecord& r) { second.push_back(r); }, opts);
    EXPECT_EQ(s1.pairs, 40u);
    ASSERT_EQ(first.size(), 40u);
    ASSERT_EQ(second.size(), 40u);
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_EQ(first[i].input, second[i].input);
        EXPECT_EQ(first[i].target, second[i].target);
        EXPECT_EQ(first[i].degradation, second[i].degradation);
    }
}

TEST(PairDataset, ReplayFromJson) {
    auto imgs = phantoms(2, 64);
    imgs[1].domain = ImageDomain::ultrasound;
    std::vector<PairRecord> recs;
    emit_pair_dataset(imgs, 3, 12, [&](const PairRecord& r) { recs.push_back(r); });
    for (const auto& r : recs) {
        const nlohmann::json j = nlohmann::json::parse(pair_spec_json(r).dump());
        const auto [input, target] = replay_pair(imgs[r.image_id == "ph0" ? 0 : 1].image, j);
        EXPECT_EQ(input, r.input);
        EXPECT_EQ(target, r.target);
    }
    EXPECT_TRUE(pair_spec_json(recs.back()).contains("nllr"));
}

TEST(PairDataset, DisabledPathsGiveTarget) {
    const GrayImage img = phantom::piecewise_constant(80, 80);
    PairRecord rec;
    rec.augment = {128, 3.0, 64, {10, 20}};
    rec.degradation.seed = 5;
    rec.domain = ImageDomain::natural;
    const auto [input, target] = replay_pair(img, pair_spec_json(rec));
    EXPECT_EQ(input, target);
}

TEST(PairDataset, WriterLayout) {
    const fs::path dir = scratch("pairs");
    const auto imgs = phantoms(1, 64);
    DirectoryPairWriter writer(dir);
    emit_pair_dataset(imgs, 2, 1, std::ref(writer));
    for (const char* f : {"ph0_0_input.png", "ph0_0_target.png", "ph0_0_spec.json", "ph0_1_spec.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Dataset, LoadSortedWithStems) {
    const fs::path dir = scratch("dataset");
    save_image(GrayImage(8, 8, 0.2), dir / "b.png");
    save_image(GrayImage(8, 8, 0.4), dir / "a.pgm");
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto ds = load_dataset(dir, ImageDomain::ultrasound);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].id, "a");
    EXPECT_EQ(ds[1].id, "b");
    EXPECT_EQ(ds[0].domain, ImageDomain::ultrasound);
    EXPECT_THROW(load_dataset(dir / "nope"), IoError);
}
