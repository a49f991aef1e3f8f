#pragma once

#include "thermotrack/core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace thermotrack {

/// One feature layer: C channels on an N x N grid (rows = y, cols = x).
struct FeatureChannelMap {
  int layer_id = 0;
  std::vector<Eigen::MatrixXd> channels;

  Eigen::Index size() const { return channels.empty() ? 0 : channels.front().rows(); }
  int channel_count() const { return static_cast<int>(channels.size()); }

  /// Throws unless all channels are square, equally sized, finite and N >= 3.
  void validate() const;
};

struct FeatureStack {
  std::vector<FeatureChannelMap> layers;
  // Extraction metadata: region center and side in frame pixels.
  double center_x = 0.0;
  double center_y = 0.0;
  double region_side = 0.0;
  double crop_factor = 0.0;
};

struct MotionConfig {
  double threshold = 25.0;
  bool enabled = true;

  void validate() const;
};

enum class ChannelKind { intensity, hog, motion };

struct FeatureConfig {
  bool intensity = true;
  bool hog = true;
  MotionConfig motion;
  double crop_factor = 2.0;
  int patch_size = 125;
  int intensity_cell = 5;
  int hog_cell = 4;

  void validate() const;
  /// Grid side of the intensity and motion layers.
  int intensity_grid() const { return patch_size / intensity_cell; }
  /// Grid side of the HOG layer; the HOG sample carries one extra cell on
  /// every edge so the trimmed output spans the same region.
  int hog_grid() const;
  std::vector<ChannelKind> layer_kinds(bool has_previous) const;
};

/// Square patch centered on the box, side crop_factor * max(w, h), bilinearly
/// resampled to out_size x out_size. Out-of-frame samples replicate the edge.
Frame crop_resize(const Frame& frame, const BoundingBox& box, double crop_factor, int out_size);

/// Same resampling for an explicitly given square region.
Frame crop_region(const Frame& frame, double center_x, double center_y, double side,
                  int out_size);

/// Cell-averaged grayscale rescaled from [0, 255] to [-0.5, 0.5].
FeatureChannelMap intensity_channel(const Frame& patch, int cell);

/// 31-channel Felzenszwalb HOG: 18 contrast-sensitive orientations, 9
/// contrast-insensitive and 4 texture-energy channels. Output side is
/// side / cell - 2.
FeatureChannelMap hog_channels(const Frame& patch, int cell);

/// Thresholded absolute frame difference, average-pooled over cell x cell
/// blocks.
FeatureChannelMap motion_mask(const Frame& current, const Frame& previous,
                              const MotionConfig& config, int cell);

/// Crops and extracts every configured layer. The motion layer is present iff
/// motion is enabled and a previous frame is given.
FeatureStack build_stack(const Frame& frame, const Frame* previous, const BoundingBox& box,
                         const FeatureConfig& config);

/// Same extraction for an explicit square region of the given side.
FeatureStack build_stack(const Frame& frame, const Frame* previous, double center_x, double center_y,
                         double region_side, const FeatureConfig& config);

}  // namespace thermotrack
