#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "dynapool/depth_io.hpp"
#include "dynapool/errors.hpp"
#include "dynapool/preprocessing.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace dynapool;
using dynapool::testing::TempDir;

namespace {

DepthFrame ramp_frame(int w, int h, std::uint16_t offset = 0) {
  std::vector<std::uint16_t> data(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint16_t>(500 + offset + i % 1000);
  return DepthFrame(w, h, std::move(data));
}

DynamicImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> byte(0, 255);
  DynamicImage img;
  img.width = w;
  img.height = h;
  img.kind = ImageKind::ddni;
  img.direction = Direction::backward;
  for (auto& ch : img.channels) {
    ch.resize(static_cast<std::size_t>(w) * h);
    for (auto& v : ch) v = static_cast<std::uint8_t>(byte(rng));
  }
  return img;
}

}  // namespace

TEST(DepthFrame, RejectsBadShapes) {
  EXPECT_THROW(DepthFrame(1, 4, std::vector<std::uint16_t>(4)), std::invalid_argument);
  EXPECT_THROW(DepthFrame(2, 2, std::vector<std::uint16_t>(3)), std::invalid_argument);
  EXPECT_NO_THROW(DepthFrame(2, 2, std::vector<std::uint16_t>(4)));
}

TEST(DepthSequence, EnforcesLengthAndShape) {
  EXPECT_THROW(DepthSequence({ramp_frame(4, 4)}, "one"), std::invalid_argument);
  EXPECT_THROW(DepthSequence({ramp_frame(4, 4), ramp_frame(5, 4)}, "mixed"), std::invalid_argument);
  DepthSequence seq({ramp_frame(4, 4, 0), ramp_frame(4, 4, 7)}, "ok", 3);
  EXPECT_EQ(seq.reversed().frames().front(), seq.frames().back());
  EXPECT_EQ(seq.reversed().label(), 3);
}

TEST(NormalizeDepth, Endpoints) {
  DepthFrame f(2, 2, {100, 200, 150, 0});
  const Plane p = normalize_depth(f, 100.0, 200.0);
  EXPECT_DOUBLE_EQ(p.values[0], 0.0);
  EXPECT_DOUBLE_EQ(p.values[1], 1.0);
  EXPECT_DOUBLE_EQ(p.values[2], 0.5);
  EXPECT_DOUBLE_EQ(p.values[3], 0.0);  // invalid reading
  EXPECT_THROW(normalize_depth(f, 200.0, 200.0), std::invalid_argument);
  EXPECT_THROW(normalize_depth(f, 300.0, 200.0), std::invalid_argument);
}

TEST(NormalizeDepth, MonotoneAndIdempotent) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> depth(0, 5000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint16_t> data(64);
    for (auto& v : data) v = static_cast<std::uint16_t>(depth(rng));
    const DepthFrame f(8, 8, data);
    const Plane p = normalize_depth(f, 800.0, 4200.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < data.size(); ++j) {
        if (data[i] != 0 && data[j] != 0 && data[i] <= data[j]) EXPECT_LE(p.values[i], p.values[j]);
      }
    }
    EXPECT_EQ(normalize_depth(p, 0.0, 1.0), p);
  }
}

TEST(DefaultRange, UsesMinNonzeroAndMax) {
  DepthSequence seq({DepthFrame(2, 2, {0, 300, 900, 500}), DepthFrame(2, 2, {400, 0, 1200, 0})}, "r");
  const DepthRange r = default_range(seq);
  EXPECT_DOUBLE_EQ(r.min_mm, 300.0);
  EXPECT_DOUBLE_EQ(r.max_mm, 1200.0);

  const DepthRange single = default_range(oracle::constant_sequence(2, 3, 3, 700));
  EXPECT_LT(single.min_mm, single.max_mm);
  EXPECT_DOUBLE_EQ(single.max_mm, 700.0);

  const DepthRange empty = default_range(oracle::constant_sequence(2, 3, 3, 0));
  EXPECT_LT(empty.min_mm, empty.max_mm);
}

TEST(Manifest, RoundTripsAndResolvesRelativeDirs) {
  TempDir dir;
  Manifest m;
  m.class_count = 3;
  m.entries.push_back({"a", "seq_a", 0, 0});
  m.entries.push_back({"b", "seq_b", std::nullopt, 0});
  save_sequence(DepthSequence({ramp_frame(4, 3), ramp_frame(4, 3, 1), ramp_frame(4, 3, 2)}, "a"),
                dir / "seq_a");
  save_manifest(m, dir / "manifest.json");

  const Manifest loaded = load_manifest(dir / "manifest.json");
  ASSERT_EQ(loaded.entries.size(), 2u);
  EXPECT_EQ(loaded.class_count, 3);
  EXPECT_EQ(loaded.entries[0].directory, dir.path() / "seq_a");
  EXPECT_EQ(loaded.entries[0].label, 0);
  EXPECT_EQ(loaded.entries[0].frame_count, 3);
  EXPECT_FALSE(loaded.entries[1].label.has_value());
  EXPECT_EQ(loaded.entries[1].frame_count, 0);
}

TEST(Manifest, RejectsInvalidContent) {
  TempDir dir;
  auto write = [&](const std::string& text) {
    std::ofstream(dir / "m.json") << text;
    return dir / "m.json";
  };
  EXPECT_THROW(load_manifest(write(R"({"sequences":[{"id":"a","dir":"x"},{"id":"a","dir":"y"}],"class_count":2})")),
               DataError);
  EXPECT_THROW(load_manifest(write(R"({"sequences":[{"id":"a","dir":"x","label":2}],"class_count":2})")),
               DataError);
  EXPECT_THROW(load_manifest(write(R"({"sequences":[],"class_count":2,"extra":1})")), FormatError);
  EXPECT_THROW(load_manifest(write(R"({"sequences":[{"id":"a","dir":"x","lbl":1}],"class_count":2})")),
               FormatError);
  EXPECT_THROW(load_manifest(write("not json")), FormatError);
  EXPECT_THROW(load_manifest(dir / "missing.json"), DataError);
}

TEST(LoadSequence, ReadsBackWrittenFixture) {
  TempDir dir;
  std::vector<DepthFrame> frames;
  for (int t = 0; t < 32; ++t) frames.push_back(ramp_frame(320, 240, static_cast<std::uint16_t>(t)));
  const DepthSequence seq(frames, "clip", 1);
  save_sequence(seq, dir / "clip");
  const DepthSequence loaded = load_sequence({"clip", dir / "clip", 1, 32});
  EXPECT_EQ(loaded.size(), 32u);
  EXPECT_EQ(loaded, seq);
}

TEST(LoadSequence, ReportsOffendingPath) {
  TempDir dir;
  try {
    load_sequence({"x", dir / "nope", std::nullopt, 0});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing directory"), std::string::npos);
    EXPECT_EQ(e.path(), dir / "nope");
  }

  std::filesystem::create_directories(dir / "short");
  save_depth_png(ramp_frame(4, 4), dir / "short" / frame_filename(0));
  try {
    load_sequence({"short", dir / "short", std::nullopt, 1});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sequence too short"), std::string::npos);
  }

  std::filesystem::create_directories(dir / "mixed");
  save_depth_png(ramp_frame(4, 4), dir / "mixed" / frame_filename(0));
  save_depth_png(ramp_frame(5, 4), dir / "mixed" / frame_filename(1));
  try {
    load_sequence({"mixed", dir / "mixed", std::nullopt, 2});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    EXPECT_EQ(e.path(), dir / "mixed" / frame_filename(1));
  }

  std::filesystem::create_directories(dir / "eight");
  save_depth_png(ramp_frame(4, 4), dir / "eight" / frame_filename(0));
  Mask m(4, 4, 1);
  save_mask_png(m, dir / "eight" / frame_filename(1));
  EXPECT_THROW(load_sequence({"eight", dir / "eight", std::nullopt, 2}), FormatError);
}

TEST(LoadSequence, SortsByFrameIndex) {
  TempDir dir;
  std::filesystem::create_directories(dir / "s");
  save_depth_png(ramp_frame(3, 3, 2), dir / "s" / frame_filename(10));
  save_depth_png(ramp_frame(3, 3, 1), dir / "s" / frame_filename(2));
  save_depth_png(ramp_frame(3, 3, 0), dir / "s" / frame_filename(0));
  const DepthSequence seq = load_sequence({"s", dir / "s", std::nullopt, 3});
  EXPECT_EQ(seq.frames()[0], ramp_frame(3, 3, 0));
  EXPECT_EQ(seq.frames()[2], ramp_frame(3, 3, 2));
}

TEST(Synthetic, IsDeterministic) {
  SynthSpec spec{Archetype::swipe_right, 12, 32, 24, 4.0, 7};
  EXPECT_EQ(synth_sequence(spec), synth_sequence(spec));
}

TEST(Synthetic, NoiselessBackgroundIsExactPlane) {
  const SyntheticScene scene = synth_scene({Archetype::circle, 10, 32, 32, 0.0, 3});
  for (std::size_t t = 0; t < scene.sequence.size(); ++t) {
    const auto data = scene.sequence.frames()[t].data();
    std::size_t blob_pixels = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (scene.blob_masks[t].values[i]) {
        ++blob_pixels;
        EXPECT_LT(data[i], scene.plane_depth_mm);
      } else {
        EXPECT_EQ(data[i], scene.plane_depth_mm);
      }
    }
    EXPECT_GT(blob_pixels, 0u);
  }
}

TEST(Synthetic, ArchetypesDiffer) {
  const auto circle = synth_sequence({Archetype::circle, 12, 32, 32, 0.0, 7});
  const auto swipe = synth_sequence({Archetype::swipe_right, 12, 32, 32, 0.0, 7});
  EXPECT_NE(circle, swipe);
  for (Archetype a : all_archetypes()) EXPECT_EQ(parse_archetype(to_string(a)), a);
  EXPECT_THROW(parse_archetype("wave"), std::invalid_argument);
  EXPECT_THROW(synth_sequence({Archetype::circle, 1, 32, 32, 0.0, 7}), std::invalid_argument);
}

TEST(DynamicImageIo, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const DynamicImage img = random_image(rng, 3 + trial, 2 + 2 * trial);
    const auto path = dir / image_filename("seq_" + std::to_string(trial), img.kind, img.direction);
    save_image(img, path);
    EXPECT_EQ(load_image(path), img);
  }
}

TEST(DynamicImageIo, FilenameCarriesKindAndDirection) {
  EXPECT_EQ(image_filename("clip_07", ImageKind::ddmni, Direction::forward), "clip_07_ddmni_forward.png");
  for (ImageKind k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  for (Direction d : kAllDirections) EXPECT_EQ(parse_direction(to_string(d)), d);
}

TEST(DynamicImageIo, RejectsForeignFiles) {
  TempDir dir;
  const auto text = dir / "a_ddi_forward.png";
  std::ofstream(text) << "definitely not a png";
  EXPECT_THROW(load_image(text), FormatError);

  const auto deep = dir / "b_ddi_forward.png";
  save_depth_png(ramp_frame(4, 4), deep);
  EXPECT_THROW(load_image(deep), FormatError);

  std::mt19937_64 rng(1);
  const auto unnamed = dir / "plain.png";
  save_image(random_image(rng, 4, 4), unnamed);
  EXPECT_THROW(load_image(unnamed), FormatError);

  EXPECT_THROW(save_image(random_image(rng, 4, 4), dir / "no_such_dir" / "x_ddi_forward.png"), DataError);
}
