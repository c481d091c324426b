#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "dynapool/depth_io.hpp"

namespace dynapool {

namespace {

constexpr Archetype kArchetypes[] = {Archetype::swipe_right, Archetype::swipe_left,
                                     Archetype::swipe_up,    Archetype::swipe_down,
                                     Archetype::circle,      Archetype::push};

struct BlobState {
  double cx;  // fraction of width
  double cy;  // fraction of height
  double depth_offset_mm;
  double radius_scale;
};

BlobState trajectory(Archetype archetype, double s) {
  switch (archetype) {
    case Archetype::swipe_right: return {0.15 + 0.7 * s, 0.5, 0.0, 1.0};
    case Archetype::swipe_left: return {0.85 - 0.7 * s, 0.5, 0.0, 1.0};
    case Archetype::swipe_up: return {0.5, 0.85 - 0.7 * s, 0.0, 1.0};
    case Archetype::swipe_down: return {0.5, 0.15 + 0.7 * s, 0.0, 1.0};
    case Archetype::circle: {
      const double a = 2.0 * std::numbers::pi * s;
      return {0.5 + 0.25 * std::cos(a), 0.5 + 0.25 * std::sin(a), 0.0, 1.0};
    }
    case Archetype::push: return {0.5, 0.5, 600.0 * (1.0 - s), 0.7 + 0.6 * s};
  }
  return {0.5, 0.5, 0.0, 1.0};
}

}  // namespace

std::span<const Archetype> all_archetypes() { return kArchetypes; }

std::string_view to_string(Archetype archetype) {
  switch (archetype) {
    case Archetype::swipe_right: return "swipe-right";
    case Archetype::swipe_left: return "swipe-left";
    case Archetype::swipe_up: return "swipe-up";
    case Archetype::swipe_down: return "swipe-down";
    case Archetype::circle: return "circle";
    case Archetype::push: return "push";
  }
  return "unknown";
}

Archetype parse_archetype(std::string_view text) {
  for (Archetype a : kArchetypes) {
    if (to_string(a) == text) return a;
  }
  throw std::invalid_argument("unknown gesture archetype '" + std::string(text) + "'");
}

SyntheticScene synth_scene(const SynthSpec& spec, std::string sequence_id) {
  if (spec.frames < 2) throw std::invalid_argument("synthetic sequence needs at least 2 frames");
  if (spec.width < 3 || spec.height < 3) throw std::invalid_argument("synthetic frames must be at least 3x3");
  if (spec.noise_level < 0.0) throw std::invalid_argument("noise_level must be nonnegative");
  if (spec.blob_radius <= 0.0) throw std::invalid_argument("blob_radius must be positive");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto plane_mm = static_cast<std::uint16_t>(2800 + std::floor(400.0 * unit(rng)));
  const double blob_mm = 1000.0 + std::floor(400.0 * unit(rng));
  const double radius_px = std::max(
      1.5, spec.blob_radius * std::min(spec.width, spec.height) * (0.9 + 0.2 * unit(rng)));
  const double offset_x = 0.1 * unit(rng) - 0.05;
  const double offset_y = 0.1 * unit(rng) - 0.05;
  std::normal_distribution<double> noise(0.0, spec.noise_level > 0.0 ? spec.noise_level : 1.0);

  std::vector<DepthFrame> frames;
  std::vector<Mask> masks;
  frames.reserve(static_cast<std::size_t>(spec.frames));
  masks.reserve(static_cast<std::size_t>(spec.frames));

  for (int t = 0; t < spec.frames; ++t) {
    const double s = static_cast<double>(t) / static_cast<double>(spec.frames - 1);
    const BlobState b = trajectory(spec.archetype, s);
    const double cx = (b.cx + offset_x) * spec.width;
    const double cy = (b.cy + offset_y) * spec.height;
    const double r = radius_px * b.radius_scale;
    const double depth = blob_mm + b.depth_offset_mm;

    std::vector<std::uint16_t> data(static_cast<std::size_t>(spec.width) * spec.height);
    Mask mask(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const bool inside = dx * dx + dy * dy <= r * r;
        double v = inside ? depth : static_cast<double>(plane_mm);
        if (spec.noise_level > 0.0) v += noise(rng);
        const std::size_t i = mask.index(x, y);
        data[i] = static_cast<std::uint16_t>(std::clamp(std::lround(v), 1L, 65535L));
        mask.values[i] = inside ? 1 : 0;
      }
    }
    frames.emplace_back(spec.width, spec.height, std::move(data));
    masks.push_back(std::move(mask));
  }

  return {DepthSequence(std::move(frames), std::move(sequence_id)), std::move(masks), plane_mm};
}

DepthSequence synth_sequence(const SynthSpec& spec, std::string sequence_id) {
  return synth_scene(spec, std::move(sequence_id)).sequence;
}

}  // namespace dynapool
