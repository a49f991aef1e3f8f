#include "thermotrack/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace thermotrack {
namespace {

constexpr int kSupersample = 8;

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Two cycles of a separable sinusoid across the box, in the box's own coordinates.
double pattern(const BoundingBox& box, double px, double py) {
  const double u = (px - box.x) / box.w, v = (py - box.y) / box.h;
  return std::sin(2.0 * std::numbers::pi * 2.0 * u) * std::sin(2.0 * std::numbers::pi * 2.0 * v);
}

// Paints the shape inscribed in box, blending by the covered fraction of each
// pixel; supersampled when the shape is a disc or carries a texture.
void paint(Eigen::ArrayXXd& image, TargetShape shape, const BoundingBox& box, double value, double texture = 0.0) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(static_cast<int>(image.cols()), static_cast<int>(std::ceil(box.x + box.w)));
  const int y1 = std::min(static_cast<int>(image.rows()), static_cast<int>(std::ceil(box.y + box.h)));
  const double cx = box.cx(), cy = box.cy(), rx = box.w / 2.0, ry = box.h / 2.0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      double covered = 0.0, painted = 0.0;
      if (shape == TargetShape::rectangle && texture == 0.0) {
        covered = overlap_1d(x, x + 1.0, box.x, box.x + box.w) * overlap_1d(y, y + 1.0, box.y, box.y + box.h);
        painted = covered * value;
      } else {
        constexpr double inv = 1.0 / (kSupersample * kSupersample);
        for (int sy = 0; sy < kSupersample; ++sy)
          for (int sx = 0; sx < kSupersample; ++sx) {
            const double px = x + (sx + 0.5) / kSupersample, py = y + (sy + 0.5) / kSupersample;
            const bool inside = shape == TargetShape::rectangle
                                    ? px >= box.x && px < box.x + box.w && py >= box.y && py < box.y + box.h
                                    : std::pow((px - cx) / rx, 2) + std::pow((py - cy) / ry, 2) <= 1.0;
            if (!inside) continue;
            covered += inv;
            painted += inv * (value + texture * pattern(box, px, py));
          }
      }
      image(y, x) = (1.0 - covered) * image(y, x) + painted;
    }
}

bool boxes_touch(const BoundingBox& a, const BoundingBox& b, double gap) {
  return a.x < b.x + b.w + gap && b.x < a.x + a.w + gap && a.y < b.y + b.h + gap && b.y < a.y + a.h + gap;
}

std::vector<BoundingBox> place_distractors(const SynthSpec& spec, std::mt19937_64& rng) {
  std::vector<BoundingBox> path;
  for (int t = 0; t < spec.length; ++t) path.push_back(spec.box_at(t));
  std::vector<BoundingBox> placed;
  const double w = spec.target_w, h = spec.target_h;
  // Candidates sit just beside a random point of the path, where they compete with the target.
  std::uniform_int_distribution<int> frame(0, spec.length - 1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), gap(3.0, 12.0);
  for (int attempt = 0; attempt < 2000 && static_cast<int>(placed.size()) < spec.distractors; ++attempt) {
    const BoundingBox& anchor = path[frame(rng)];
    const double a = angle(rng), r = std::max(w, h) + gap(rng);
    const BoundingBox candidate = BoundingBox::from_center(std::round(anchor.cx() + r * std::cos(a)),
                                                           std::round(anchor.cy() + r * std::sin(a)), w, h);
    if (candidate.x < 0 || candidate.y < 0 || candidate.x + w > spec.width || candidate.y + h > spec.height) continue;
    const bool clear =
        std::none_of(path.begin(), path.end(), [&](const BoundingBox& b) { return boxes_touch(candidate, b, 2.0); }) &&
        std::none_of(placed.begin(), placed.end(), [&](const BoundingBox& b) { return boxes_touch(candidate, b, 2.0); });
    if (clear) placed.push_back(candidate);
  }
  if (static_cast<int>(placed.size()) < spec.distractors)
    throw Error(ErrorCategory::config, spec.name + ": no room for " + std::to_string(spec.distractors) + " distractors");
  return placed;
}

}  // namespace

void SynthSpec::validate() const {
  if (width < 16 || height < 16) throw Error(ErrorCategory::config, name + ": frame must be at least 16x16");
  if (length < 2) throw Error(ErrorCategory::config, name + ": length must be at least 2");
  if (!(target_w >= 1.0 && target_h >= 1.0)) throw Error(ErrorCategory::config, name + ": target smaller than a pixel");
  if (!(std::abs(foreground - background) > 0.0)) throw Error(ErrorCategory::config, name + ": zero contrast");
  for (double v : {foreground, background})
    if (!(v >= 0.0 && v <= 255.0)) throw Error(ErrorCategory::config, name + ": intensities must lie in [0, 255]");
  if (!(std::abs(texture) <= std::min(foreground, 255.0 - foreground)))
    throw Error(ErrorCategory::config, name + ": texture amplitude would leave [0, 255]");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCategory::config, name + ": noise sigma must be non-negative");
  if (!(scale_per_frame > 0.0)) throw Error(ErrorCategory::config, name + ": scale factor must be positive");
  if (motion == MotionModel::sinusoidal && !(period > 0.0))
    throw Error(ErrorCategory::config, name + ": period must be positive");
  if (distractors < 0) throw Error(ErrorCategory::config, name + ": distractor count must be non-negative");
  if (occluder && (occluder->first_frame > occluder->last_frame || occluder->box.w <= 0 || occluder->box.h <= 0))
    throw Error(ErrorCategory::config, name + ": malformed occluder");
}

BoundingBox SynthSpec::box_at(int t) const {
  double cx = start_x, cy = start_y;
  switch (motion) {
    case MotionModel::fixed: break;
    case MotionModel::linear:
      cx += velocity_x * t;
      cy += velocity_y * t;
      break;
    case MotionModel::sinusoidal: {
      const double angle = 2.0 * std::numbers::pi * t / period + phase;
      cx += amplitude_x * std::sin(angle);
      cy += amplitude_y * std::sin(angle);
      break;
    }
  }
  const double s = std::pow(scale_per_frame, t);
  return BoundingBox::from_center(cx, cy, target_w * s, target_h * s);
}

Sequence render_sequence(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::vector<BoundingBox> distractors = place_distractors(spec, rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Frame> frames;
  std::vector<BoundingBox> groundtruth;
  std::vector<TagSet> attributes;
  for (int t = 0; t < spec.length; ++t) {
    const BoundingBox box = spec.box_at(t);
    if (box.x < 0.0 || box.y < 0.0 || box.x + box.w > spec.width || box.y + box.h > spec.height)
      throw Error(ErrorCategory::geometry, spec.name + ": target leaves the frame at frame " + std::to_string(t));
    Eigen::ArrayXXd image = Eigen::ArrayXXd::Constant(spec.height, spec.width, spec.background);
    for (const auto& d : distractors) paint(image, spec.shape, d, spec.foreground);
    paint(image, spec.shape, box, spec.foreground, spec.texture);
    TagSet tags;
    if (spec.occluder && t >= spec.occluder->first_frame && t <= spec.occluder->last_frame) {
      paint(image, TargetShape::rectangle, spec.occluder->box, spec.occluder->intensity);
      if (iou(spec.occluder->box, box) > 0.0) tags.insert("occlusion");
    }
    if (spec.noise_sigma > 0.0)
      for (Eigen::Index i = 0; i < image.size(); ++i) image(i) += spec.noise_sigma * noise(rng);
    image = image.round().max(0.0).min(255.0);
    frames.push_back(Frame::from_array(image));
    groundtruth.push_back(box);
    attributes.push_back(std::move(tags));
  }
  Sequence seq = Sequence::in_memory(spec.name, std::move(frames), std::move(groundtruth));
  seq.frame_attributes = std::move(attributes);
  seq.sequence_attributes = spec.sequence_attributes;
  return seq;
}

Sequence synth_sequence(const SynthSpec& spec, const fs::path& out_dir) {
  const Sequence seq = render_sequence(spec);
  fs::create_directories(out_dir);
  std::ofstream gt(out_dir / "groundtruth.txt");
  if (!gt) throw Error(ErrorCategory::io, "cannot write " + (out_dir / "groundtruth.txt").string());
  std::vector<std::string> occluded;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "%08zu.png", t + 1);
    write_image(out_dir / name, seq.frame(t));
    gt << format_groundtruth(seq.groundtruth[t]) << '\n';
    occluded.push_back(seq.frame_attributes[t].count("occlusion") ? "1" : "0");
  }
  gt.close();
  const bool any_occlusion = std::find(occluded.begin(), occluded.end(), "1") != occluded.end();
  if (any_occlusion || !seq.sequence_attributes.empty()) {
    fs::create_directories(out_dir / "attributes");
    if (any_occlusion) {
      std::ofstream tag(out_dir / "attributes" / "occlusion.tag");
      for (const auto& v : occluded) tag << v << '\n';
    }
    if (!seq.sequence_attributes.empty()) {
      std::ofstream tags(out_dir / "attributes" / "sequence.tags");
      for (const auto& t : seq.sequence_attributes) tags << t << '\n';
    }
  }
  return load_sequence(out_dir);
}

std::vector<SynthSpec> easy_suite(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::vector<SynthSpec> suite;
  for (int i = 0; i < count; ++i) {
    SynthSpec s;
    s.name = "easy_" + std::to_string(i + 1);
    s.width = 200;
    s.height = 160;
    s.length = 100;
    s.shape = i % 2 == 0 ? TargetShape::rectangle : TargetShape::disc;
    s.target_w = std::round(uniform(20.0, 30.0));
    s.target_h = std::round(uniform(20.0, 30.0));
    s.motion = MotionModel::sinusoidal;
    s.amplitude_x = uniform(20.0, 45.0);
    s.amplitude_y = uniform(10.0, 30.0);
    // Peak speed 2 pi A / period stays below 3 px/frame.
    s.period = std::max(60.0, 2.0 * std::numbers::pi * std::hypot(s.amplitude_x, s.amplitude_y) / 2.8);
    s.phase = uniform(0.0, 2.0 * std::numbers::pi);
    s.start_x = s.width / 2.0;
    s.start_y = s.height / 2.0;
    s.foreground = std::round(uniform(180.0, 220.0));
    s.background = std::round(uniform(40.0, 80.0));
    s.noise_sigma = uniform(2.0, 5.0);
    s.seed = rng();
    suite.push_back(s);
  }
  return suite;
}

std::vector<SynthSpec> low_contrast_suite(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::vector<SynthSpec> suite;
  for (int i = 0; i < count; ++i) {
    SynthSpec s;
    s.name = "lowcontrast_" + std::to_string(i + 1);
    s.width = 200;
    s.height = 160;
    s.length = 100;
    s.target_w = 14.0;
    s.target_h = 14.0;
    s.motion = MotionModel::sinusoidal;
    s.amplitude_x = uniform(30.0, 50.0);
    s.amplitude_y = uniform(10.0, 25.0);
    s.period = std::max(60.0, 2.0 * std::numbers::pi * std::hypot(s.amplitude_x, s.amplitude_y) / 3.0);
    s.phase = uniform(0.0, 2.0 * std::numbers::pi);
    s.start_x = s.width / 2.0;
    s.start_y = s.height / 2.0;
    s.background = 100.0;
    s.foreground = 112.0;
    s.noise_sigma = 4.0;
    s.distractors = 6;
    s.seed = rng();
    suite.push_back(s);
  }
  return suite;
}

}  // namespace thermotrack
