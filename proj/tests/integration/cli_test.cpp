#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using dynapool::cli::run_cli;
using dynapool::testing::TempDir;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

std::size_t count_png(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".png" ? 1 : 0;
  return n;
}

/// Small and fast: 4 frames of 16x16, short pooling budget.
Run small_synth(const fs::path& out, int classes, int count, int seed) {
  return cli({"synth", "--classes", std::to_string(classes), "--count", std::to_string(count), "--frames", "4",
              "--size", "16", "--seed", std::to_string(seed), "--out", out.string()});
}

const std::vector<std::string> kFast = {"--iters", "150"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
  args.insert(args.end(), kFast.begin(), kFast.end());
  return args;
}

}  // namespace

TEST(CliSynth, WritesOneEntryPerSequence) {
  TempDir dir;
  const auto r = small_synth(dir.path(), 5, 20, 1);
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("sequences").size(), 100u);
  EXPECT_EQ(m.at("class_count"), 5);
  EXPECT_EQ(m.at("sequences")[0].at("label"), 0);
  EXPECT_EQ(m.at("sequences")[99].at("label"), 4);
}

TEST(CliSynth, SameSeedSameTree) {
  TempDir a, b, c;
  ASSERT_EQ(small_synth(a.path(), 2, 3, 42).code, 0);
  ASSERT_EQ(small_synth(b.path(), 2, 3, 42).code, 0);
  ASSERT_EQ(small_synth(c.path(), 2, 3, 43).code, 0);
  EXPECT_EQ(tree(a.path()), tree(b.path()));
  EXPECT_NE(tree(a.path()), tree(c.path()));
}

TEST(CliSynth, RejectsBadClassCount) {
  TempDir dir;
  EXPECT_EQ(small_synth(dir.path(), 0, 2, 1).code, 1);
  EXPECT_EQ(small_synth(dir.path(), 7, 2, 1).code, 1);
}

TEST(CliConvert, SixImagesPerSequenceAndResume) {
  TempDir data, out;
  ASSERT_EQ(small_synth(data.path(), 5, 20, 7).code, 0);
  const auto first = cli(with_fast({"convert", "--manifest", (data / "manifest.json").string(), "--out", out.path().string()}));
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(count_png(out.path()), 600u);
  EXPECT_EQ(json::parse(first.out).at("converted"), 100);

  const auto stamp = fs::last_write_time(out / "swipe-right_0000_ddi_forward.png");
  const auto again = cli(with_fast({"convert", "--manifest", (data / "manifest.json").string(), "--out", out.path().string()}));
  ASSERT_EQ(again.code, 0);
  const json summary = json::parse(again.out);
  EXPECT_EQ(summary.at("skipped"), 100);
  EXPECT_EQ(summary.at("converted"), 0);
  EXPECT_EQ(fs::last_write_time(out / "swipe-right_0000_ddi_forward.png"), stamp);

  const json sidecar = json::parse(slurp(out / "circle_0019.json"));
  EXPECT_EQ(sidecar.at("label"), 4);
  EXPECT_EQ(sidecar.at("images").size(), 6u);
}

TEST(CliConvert, ConfigChangeInvalidatesOutputs) {
  TempDir data, out;
  ASSERT_EQ(small_synth(data.path(), 1, 2, 3).code, 0);
  const std::string manifest = (data / "manifest.json").string();
  ASSERT_EQ(cli(with_fast({"convert", "--manifest", manifest, "--out", out.path().string()})).code, 0);
  const auto changed = cli(with_fast({"convert", "--manifest", manifest, "--out", out.path().string(), "--lambda", "2"}));
  ASSERT_EQ(changed.code, 0);
  EXPECT_EQ(json::parse(changed.out).at("converted"), 2);
}

TEST(CliConvert, CorruptFrameFailsOnlyItsSequence) {
  TempDir data, out;
  ASSERT_EQ(small_synth(data.path(), 2, 3, 5).code, 0);
  spit(data / "sequences/swipe-left_0001/frame_000002.png", "not a png");
  const auto r = cli(with_fast({"convert", "--manifest", (data / "manifest.json").string(), "--out",
                                out.path().string(), "--workers", "2"}));
  EXPECT_EQ(r.code, 3);
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary.at("converted"), 5);
  ASSERT_EQ(summary.at("failed").size(), 1u);
  EXPECT_EQ(summary.at("failed")[0].at("sequence_id"), "swipe-left_0001");
  EXPECT_EQ(count_png(out.path()), 30u);
  EXPECT_FALSE(fs::exists(out / "swipe-left_0001.json"));
}

TEST(CliConvert, DumpsIntermediates) {
  TempDir data, out;
  ASSERT_EQ(small_synth(data.path(), 1, 1, 2).code, 0);
  ASSERT_EQ(cli(with_fast({"convert", "--manifest", (data / "manifest.json").string(), "--out", out.path().string(),
                           "--dump-intermediate"}))
                .code,
            0);
  const fs::path dump = out / "intermediate" / "swipe-right_0000";
  EXPECT_TRUE(fs::exists(dump / "normals_frame_000003.png"));
  EXPECT_TRUE(fs::exists(dump / "foreground_frame_000000.png"));
  EXPECT_TRUE(json::parse(slurp(dump / "background.json")).contains("background_threshold"));
}

TEST(CliConvert, MissingManifestIsDataError) {
  TempDir out;
  const auto r = cli({"convert", "--manifest", (out / "nope.json").string(), "--out", out.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos);
}

TEST(CliConfig, PrintsVersionedSchema) {
  const auto r = cli({"--print-config"});
  ASSERT_EQ(r.code, 0);
  const json c = json::parse(r.out);
  EXPECT_EQ(c.at("schema_version"), 1);
  EXPECT_EQ(c.at("classifier").at("downsample"), 16);
  EXPECT_EQ(c.at("histogram").at("tolerance"), 0.1);
  EXPECT_EQ(c.at("gmm").at("mixtures"), 3);
  EXPECT_EQ(c.at("pooling").at("lambda"), 1.0);

  const auto flagged = cli({"convert", "--manifest", "m.json", "--out", "o", "--lambda", "2.5", "--print-config"});
  ASSERT_EQ(flagged.code, 0) << flagged.err;
  EXPECT_EQ(json::parse(flagged.out).at("pooling").at("lambda"), 2.5);
}

TEST(CliConfig, FileOverridesAndRejectsUnknownKeys) {
  TempDir dir;
  spit(dir / "ok.json", R"({"gmm": {"mixtures": 5}, "classifier": {"downsample": 8}})");
  const auto ok = cli({"--config", (dir / "ok.json").string(), "--print-config"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(json::parse(ok.out).at("gmm").at("mixtures"), 5);
  EXPECT_EQ(json::parse(ok.out).at("classifier").at("downsample"), 8);

  spit(dir / "bad.json", R"({"gmm": {"modes": 5}})");
  const auto bad = cli({"--config", (dir / "bad.json").string(), "--print-config"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("gmm.modes"), std::string::npos);

  EXPECT_EQ(cli({"convert", "--manifest", "m", "--out", "o", "--lambda", "-1"}).code, 1);
  EXPECT_EQ(cli({"convert", "--manifest", "m", "--out", "o", "--no-such-flag"}).code, 1);
}

TEST(CliFuse, WorkedExampleAndIntermediates) {
  TempDir dir;
  const std::map<std::string, std::string> rows = {
      {"ddi,forward", "0.8,0.2"},  {"ddi,backward", "0.6,0.4"},   {"ddni,forward", "0.5,0.5"},
      {"ddni,backward", "0.5,0.5"}, {"ddmni,forward", "0.5,0.5"}, {"ddmni,backward", "0.5,0.5"},
  };
  std::vector<std::string> args = {"fuse", "--class-count", "2", "--dump-intermediate"};
  int i = 0;
  for (const auto& [key, scores] : rows) {
    const fs::path p = dir / ("s" + std::to_string(i++) + ".csv");
    spit(p, "sequence_id,kind,direction,score_0,score_1\nclip," + key + "," + scores + "\n");
    args.push_back("--scores");
    args.push_back(p.string());
  }
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const json p = json::parse(r.out).at("predictions").at(0);
  EXPECT_EQ(p.at("sequence_id"), "clip");
  EXPECT_EQ(p.at("label"), 0);
  EXPECT_NEAR(p.at("pair_fused").at("ddi").at("scores")[0].get<double>(), 6.0 / 7.0, 1e-12);
  EXPECT_NEAR(p.at("pair_fused").at("ddi").at("scores")[1].get<double>(), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(p.at("confidence").get<double>(), 6.0 / 7.0, 1e-12);
}

TEST(CliFuse, OneHotPassesThroughAndMismatchIsNamed) {
  TempDir dir;
  std::vector<std::string> args = {"fuse", "--class-count", "3"};
  int i = 0;
  for (const char* kind : {"ddi", "ddni", "ddmni"}) {
    for (const char* d : {"forward", "backward"}) {
      const fs::path p = dir / ("s" + std::to_string(i++) + ".csv");
      std::string text = std::string("a,") + kind + "," + d + ",0,0,1\n";
      text += std::string(i == 4 ? "x" : "b") + "," + kind + "," + d + ",1,0,0\n";
      spit(p, text);
      args.push_back("--scores");
      args.push_back(p.string());
    }
  }
  const auto bad = cli(args);
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("row 2"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("'x'"), std::string::npos) << bad.err;

  const fs::path odd = args.back();
  spit(dir / "s3.csv", "a,ddni,backward,0,0,1\nb,ddni,backward,1,0,0\n");
  const auto ok = cli(args);
  ASSERT_EQ(ok.code, 0) << ok.err;
  const json preds = json::parse(ok.out).at("predictions");
  EXPECT_EQ(preds[0].at("label"), 2);
  EXPECT_EQ(preds[1].at("label"), 0);
  EXPECT_EQ(preds[0].at("confidence"), 1.0);
}

TEST(CliFuse, RequiresSixDistinctFiles) {
  TempDir dir;
  spit(dir / "s.csv", "a,ddi,forward,0.5,0.5\n");
  std::vector<std::string> args = {"fuse", "--class-count", "2"};
  for (int i = 0; i < 6; ++i) {
    args.push_back("--scores");
    args.push_back((dir / "s.csv").string());
  }
  EXPECT_EQ(cli(args).code, 2);
  args.resize(5);
  EXPECT_EQ(cli(args).code, 1);
}

TEST(CliEvaluate, SingleClassIsTriviallyPerfect) {
  TempDir train, test, scores;
  ASSERT_EQ(small_synth(train.path(), 1, 3, 10).code, 0);
  ASSERT_EQ(small_synth(test.path(), 1, 2, 20).code, 0);
  const auto r = cli(with_fast({"evaluate", "--train-manifest", (train / "manifest.json").string(),
                                "--test-manifest", (test / "manifest.json").string(), "--scores-dir",
                                scores.path().string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(r.out);
  EXPECT_EQ(report.at("n"), 2);
  EXPECT_EQ(report.at("recognition_rate"), 1.0);

  // The score dump feeds straight back into fuse.
  std::vector<std::string> args = {"fuse", "--class-count", "1"};
  for (const auto& e : fs::directory_iterator(scores.path())) {
    args.push_back("--scores");
    args.push_back(e.path().string());
  }
  const auto fused = cli(args);
  ASSERT_EQ(fused.code, 0) << fused.err;
  EXPECT_EQ(json::parse(fused.out).at("predictions").size(), 2u);
}

TEST(CliEvaluate, MemorizesItsOwnTrainingSet) {
  TempDir data, cache;
  ASSERT_EQ(cli({"synth", "--classes", "3", "--count", "4", "--frames", "12", "--size", "32", "--seed", "8", "--out",
                 data.path().string()})
                .code,
            0);
  const std::string m = (data / "manifest.json").string();
  const auto r = cli({"evaluate", "--train-manifest", m, "--test-manifest", m, "--out", cache.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(json::parse(r.out).at("recognition_rate").get<double>(), 0.95);
  EXPECT_EQ(count_png(cache / "train"), 72u);
  EXPECT_FALSE(fs::exists(cache / "test"));  // same manifest, converted once
}

TEST(CliEvaluate, MissingTestLabelIsDataError) {
  TempDir train, test;
  ASSERT_EQ(small_synth(train.path(), 2, 2, 1).code, 0);
  ASSERT_EQ(small_synth(test.path(), 2, 2, 2).code, 0);
  json m = json::parse(slurp(test / "manifest.json"));
  m["sequences"][1].erase("label");
  spit(test / "manifest.json", m.dump());
  const auto r = cli(with_fast({"evaluate", "--train-manifest", (train / "manifest.json").string(), "--test-manifest",
                                (test / "manifest.json").string()}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("label missing"), std::string::npos) << r.err;
}

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
}
