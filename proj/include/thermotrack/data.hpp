#pragma once

#include "thermotrack/core.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thermotrack {

namespace fs = std::filesystem;

// Image files. The format follows the extension: .pgm (P5 or P2) or .png.
Frame read_image(const fs::path& path);

/// Writes an 8-bit image; values are rounded and clamped to [0, 255].
void write_image(const fs::path& path, const Frame& frame);

/// Sorts names so that embedded digit runs compare numerically.
bool natural_less(const std::string& a, const std::string& b);

/// The .png and .pgm files of a directory in natural order.
std::vector<fs::path> list_images(const fs::path& dir);

/// Parses one ground-truth line of 4 (x,y,w,h) or 8 (polygon) values.
BoundingBox parse_groundtruth_line(const std::string& line, std::size_t line_number);

/// Exact textual form of a box: shortest round-trip decimals, comma separated.
std::string format_groundtruth(const BoundingBox& box);

/// Loads a sequence directory: ordered .png/.pgm frames, `groundtruth.txt`,
/// and optional tags under `attributes/`. A `<tag>.tag` file holds one 0/1
/// flag per frame; `sequence.tags` lists sequence-level tags one per line.
/// Frames are decoded on demand.
Sequence load_sequence(const fs::path& dir);

struct DatasetManifest {
  struct Entry {
    std::string name;
    std::size_t frames = 0;
    TagSet tags;
  };
  fs::path root;
  std::vector<Entry> sequences;

  /// Reads `list.txt` when present, else every subdirectory holding a
  /// `groundtruth.txt`, in natural order.
  static DatasetManifest scan(const fs::path& root);
};

std::vector<Sequence> load_dataset(const DatasetManifest& manifest);

enum class TargetShape { rectangle, disc };
enum class MotionModel { fixed, linear, sinusoidal };

struct OccluderSpec {
  int first_frame = 0;
  int last_frame = 0;  // inclusive
  BoundingBox box;
  double intensity = 0.0;
};

struct SynthSpec {
  std::string name = "synth";
  int width = 160;
  int height = 120;
  int length = 50;
  TargetShape shape = TargetShape::rectangle;
  double target_w = 24.0;
  double target_h = 24.0;
  /// Centre of the target in frame 0; the oscillation centre for sinusoidal motion.
  double start_x = 80.0;
  double start_y = 60.0;
  MotionModel motion = MotionModel::fixed;
  double velocity_x = 0.0;  // px per frame
  double velocity_y = 0.0;
  double amplitude_x = 0.0;  // sinusoidal excursion, px
  double amplitude_y = 0.0;
  double period = 50.0;  // frames
  double phase = 0.0;    // radians
  /// Target size multiplies by this factor every frame.
  double scale_per_frame = 1.0;
  double foreground = 200.0;
  double background = 60.0;
  double noise_sigma = 0.0;
  /// Amplitude of a smooth pattern fixed to the target's own coordinates,
  /// so that it scales and moves with the target. 0 renders a flat target.
  double texture = 0.0;
  /// Static blobs at foreground intensity placed beside, never on, the target path.
  int distractors = 0;
  std::optional<OccluderSpec> occluder;
  std::uint64_t seed = 1;
  TagSet sequence_attributes;

  void validate() const;

  /// Target box in frame t as rendered.
  BoundingBox box_at(int t) const;
};

/// Renders the sequence in memory. Frames are integer valued in [0, 255], so
/// they survive an 8-bit round trip unchanged.
Sequence render_sequence(const SynthSpec& spec);

/// Renders, writes `00000001.png`... and `groundtruth.txt` into out_dir, and
/// returns the sequence loaded back from disk.
Sequence synth_sequence(const SynthSpec& spec, const fs::path& out_dir);

/// High-contrast targets, at most 3 px/frame, noise sigma at most 5, 100 frames.
std::vector<SynthSpec> easy_suite(int count = 5, std::uint64_t seed = 2024);

/// Contrast 12, noise sigma 4, moving targets among static distractors.
std::vector<SynthSpec> low_contrast_suite(int count = 10, std::uint64_t seed = 7);

struct Histogram {
  std::vector<double> edges;      // bins + 1 values
  std::vector<double> frequency;  // sums to 1
  std::size_t pixels = 0;

  void write_csv(std::ostream& out) const;
};

/// Gradient magnitudes from central differences with edge replication,
/// binned uniformly over [low, high); values outside go to the end bins.
Histogram grad_histogram(const std::vector<Frame>& images, int bins, double low, double high);

}  // namespace thermotrack
