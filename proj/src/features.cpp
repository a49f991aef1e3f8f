#include "thermotrack/features.hpp"

#include <algorithm>
#include <cmath>

namespace thermotrack {

void FeatureChannelMap::validate() const {
  if (channels.empty()) throw Error(ErrorCategory::data, "feature layer has no channels");
  const Eigen::Index n = channels.front().rows();
  if (n < 3) throw Error(ErrorCategory::data, "feature layer grid must be at least 3x3");
  for (const auto& c : channels) {
    if (c.rows() != n || c.cols() != n)
      throw Error(ErrorCategory::data, "feature layer channels must share one square size");
    if (!c.allFinite()) throw Error(ErrorCategory::numeric, "feature layer has non-finite values");
  }
}

void MotionConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 255.0))
    throw Error(ErrorCategory::config, "motion threshold must lie in (0, 255)");
}

void FeatureConfig::validate() const {
  if (!intensity && !hog && !motion.enabled)
    throw Error(ErrorCategory::config, "feature configuration names no channel type");
  if (!(crop_factor > 1.0)) throw Error(ErrorCategory::config, "crop factor must exceed 1");
  if (patch_size < 16) throw Error(ErrorCategory::config, "patch size must be at least 16");
  if (intensity_cell < 1 || hog_cell < 1)
    throw Error(ErrorCategory::config, "cell sizes must be positive");
  if ((intensity || motion.enabled) && patch_size % intensity_cell != 0)
    throw Error(ErrorCategory::config, "intensity cell must divide the patch size");
  if ((intensity || motion.enabled) && intensity_grid() < 3)
    throw Error(ErrorCategory::config, "intensity grid must be at least 3 cells");
  if (hog && hog_grid() < 3) throw Error(ErrorCategory::config, "HOG grid must be at least 3 cells");
  motion.validate();
}

int FeatureConfig::hog_grid() const {
  return static_cast<int>(std::lround(static_cast<double>(patch_size) / hog_cell));
}

std::vector<ChannelKind> FeatureConfig::layer_kinds(bool has_previous) const {
  std::vector<ChannelKind> kinds;
  if (intensity) kinds.push_back(ChannelKind::intensity);
  if (hog) kinds.push_back(ChannelKind::hog);
  if (motion.enabled && has_previous) kinds.push_back(ChannelKind::motion);
  return kinds;
}

Frame crop_region(const Frame& frame, double center_x, double center_y, double side,
                  int out_size) {
  if (out_size < 1) throw Error(ErrorCategory::geometry, "output size must be positive");
  if (!(center_x >= 0.0 && center_x <= frame.width && center_y >= 0.0 &&
        center_y <= frame.height))
    throw Error(ErrorCategory::geometry, "crop center lies outside the frame");
  if (!(side > 0.0)) throw Error(ErrorCategory::geometry, "crop side must be positive");

  Frame patch(out_size, out_size, frame.channels);
  const double step = side / out_size;
  const double left = center_x - side / 2.0;
  const double top = center_y - side / 2.0;
  auto clamp_x = [&](long v) { return static_cast<int>(std::clamp<long>(v, 0, frame.width - 1)); };
  auto clamp_y = [&](long v) { return static_cast<int>(std::clamp<long>(v, 0, frame.height - 1)); };

  for (int py = 0; py < out_size; ++py) {
    // Pixel i of the frame covers [i, i+1) and is sampled at its center.
    const double v = top + (py + 0.5) * step - 0.5;
    const double fy0 = std::floor(v);
    const double wy = v - fy0;
    const int y0 = clamp_y(static_cast<long>(fy0));
    const int y1 = clamp_y(static_cast<long>(fy0) + 1);
    for (int px = 0; px < out_size; ++px) {
      const double u = left + (px + 0.5) * step - 0.5;
      const double fx0 = std::floor(u);
      const double wx = u - fx0;
      const int x0 = clamp_x(static_cast<long>(fx0));
      const int x1 = clamp_x(static_cast<long>(fx0) + 1);
      for (int c = 0; c < frame.channels; ++c) {
        const double top_row = (1.0 - wx) * frame.at(x0, y0, c) + wx * frame.at(x1, y0, c);
        const double bottom_row = (1.0 - wx) * frame.at(x0, y1, c) + wx * frame.at(x1, y1, c);
        patch.at(px, py, c) = (1.0 - wy) * top_row + wy * bottom_row;
      }
    }
  }
  return patch;
}

Frame crop_resize(const Frame& frame, const BoundingBox& box, double crop_factor, int out_size) {
  if (!(crop_factor > 1.0)) throw Error(ErrorCategory::geometry, "crop factor must exceed 1");
  if (out_size < 16) throw Error(ErrorCategory::geometry, "output size must be at least 16");
  return crop_region(frame, box.cx(), box.cy(), crop_factor * std::max(box.w, box.h), out_size);
}

namespace {

Eigen::MatrixXd block_average(const Eigen::ArrayXXd& image, int cell) {
  const Eigen::Index n_rows = image.rows() / cell, n_cols = image.cols() / cell;
  Eigen::MatrixXd out(n_rows, n_cols);
  const double inv = 1.0 / (static_cast<double>(cell) * cell);
  for (Eigen::Index r = 0; r < n_rows; ++r)
    for (Eigen::Index c = 0; c < n_cols; ++c)
      out(r, c) = image.block(r * cell, c * cell, cell, cell).sum() * inv;
  return out;
}

void require_square_divisible(const Frame& patch, int cell, const char* what) {
  if (cell < 1) throw Error(ErrorCategory::data, std::string(what) + ": cell must be positive");
  if (patch.width != patch.height)
    throw Error(ErrorCategory::data, std::string(what) + ": patch must be square");
  if (patch.width % cell != 0)
    throw Error(ErrorCategory::data, std::string(what) + ": cell size " + std::to_string(cell) +
                                         " does not divide patch side " +
                                         std::to_string(patch.width));
}

}  // namespace

FeatureChannelMap intensity_channel(const Frame& patch, int cell) {
  require_square_divisible(patch, cell, "intensity channel");
  FeatureChannelMap out;
  out.channels.push_back(block_average(patch.luma() / 255.0 - 0.5, cell));
  return out;
}

FeatureChannelMap motion_mask(const Frame& current, const Frame& previous,
                              const MotionConfig& config, int cell) {
  if (!current.same_shape(previous))
    throw Error(ErrorCategory::data, "motion mask: current and previous frames differ in size");
  config.validate();
  require_square_divisible(current, cell, "motion mask");
  const Eigen::ArrayXXd diff = (current.luma() - previous.luma()).abs();
  const Eigen::ArrayXXd mask = (diff > config.threshold).cast<double>();
  FeatureChannelMap out;
  out.channels.push_back(block_average(mask, cell));
  return out;
}

FeatureStack build_stack(const Frame& frame, const Frame* previous, const BoundingBox& box,
                         const FeatureConfig& config) {
  return build_stack(frame, previous, box.cx(), box.cy(), config.crop_factor * std::max(box.w, box.h),
                     config);
}

FeatureStack build_stack(const Frame& frame, const Frame* previous, double center_x, double center_y,
                         double region_side, const FeatureConfig& config) {
  config.validate();
  if (previous && !previous->same_shape(frame))
    throw Error(ErrorCategory::data, "previous frame differs in size from the current frame");
  if (!(region_side > 0.0) || !std::isfinite(region_side))
    throw Error(ErrorCategory::geometry, "feature region side must be positive");

  FeatureStack stack;
  stack.center_x = center_x;
  stack.center_y = center_y;
  stack.region_side = region_side;
  stack.crop_factor = config.crop_factor;

  const int grid = config.intensity_grid();
  const int grid_pixels = grid * config.intensity_cell;
  int next_id = 0;
  for (ChannelKind kind : config.layer_kinds(previous != nullptr)) {
    FeatureChannelMap layer;
    switch (kind) {
      case ChannelKind::intensity: {
        layer = intensity_channel(
            crop_region(frame, stack.center_x, stack.center_y, stack.region_side, grid_pixels),
            config.intensity_cell);
        break;
      }
      case ChannelKind::hog: {
        const int hog_grid = config.hog_grid();
        const int padded = (hog_grid + 2) * config.hog_cell;
        const double padded_side = stack.region_side * (hog_grid + 2) / hog_grid;
        layer = hog_channels(
            crop_region(frame, stack.center_x, stack.center_y, padded_side, padded),
            config.hog_cell);
        break;
      }
      case ChannelKind::motion: {
        const Frame curr_patch =
            crop_region(frame, stack.center_x, stack.center_y, stack.region_side, grid_pixels);
        const Frame prev_patch =
            crop_region(*previous, stack.center_x, stack.center_y, stack.region_side, grid_pixels);
        layer = motion_mask(curr_patch, prev_patch, config.motion, config.intensity_cell);
        break;
      }
    }
    layer.layer_id = next_id++;
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

}  // namespace thermotrack
