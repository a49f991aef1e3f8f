#include "thermotrack/core.hpp"

#include <algorithm>

namespace thermotrack {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::data: return "data";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::geometry: return "geometry";
  }
  return "unknown";
}

BoundingBox polygon_to_box(const Polygon& polygon) {
  double min_x = polygon.corners[0].x(), max_x = min_x;
  double min_y = polygon.corners[0].y(), max_y = min_y;
  for (const auto& p : polygon.corners) {
    if (!p.allFinite()) throw Error(ErrorCategory::geometry, "polygon has non-finite corner");
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  if (!(max_x > min_x) || !(max_y > min_y))
    throw Error(ErrorCategory::geometry, "degenerate polygon: zero width or height");
  return BoundingBox(min_x, min_y, max_x - min_x, max_y - min_y);
}

Polygon box_corners(const BoundingBox& box) {
  return Polygon{{Eigen::Vector2d(box.x, box.y), Eigen::Vector2d(box.x + box.w, box.y),
                  Eigen::Vector2d(box.x + box.w, box.y + box.h),
                  Eigen::Vector2d(box.x, box.y + box.h)}};
}

Frame::Frame(int width_, int height_, int channels_, double fill)
    : width(width_), height(height_), channels(channels_) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCategory::data, "frame dimensions must be positive");
  if (channels != 1 && channels != 3)
    throw Error(ErrorCategory::data, "frame must have 1 or 3 channels");
  pixels.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Eigen::ArrayXXd Frame::luma() const {
  Eigen::ArrayXXd out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (channels == 1) {
        out(y, x) = at(x, y);
      } else {
        out(y, x) = 0.299 * at(x, y, 0) + 0.587 * at(x, y, 1) + 0.114 * at(x, y, 2);
      }
    }
  }
  return out;
}

Frame Frame::from_array(const Eigen::ArrayXXd& gray) {
  Frame f(static_cast<int>(gray.cols()), static_cast<int>(gray.rows()), 1);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) f.at(x, y) = gray(y, x);
  return f;
}

void Sequence::validate() const {
  if (!frames) throw Error(ErrorCategory::data, "sequence '" + name + "' has no frame source");
  if (frames->size() != groundtruth.size())
    throw Error(ErrorCategory::data,
                "sequence '" + name + "': " + std::to_string(frames->size()) + " frames but " +
                    std::to_string(groundtruth.size()) + " ground-truth entries");
  if (frame_attributes.size() != groundtruth.size())
    throw Error(ErrorCategory::data,
                "sequence '" + name + "': frame attribute count does not match frame count");
}

Sequence Sequence::in_memory(std::string name, std::vector<Frame> frames,
                             std::vector<BoundingBox> groundtruth) {
  Sequence seq;
  seq.name = std::move(name);
  seq.frame_attributes.resize(groundtruth.size());
  seq.groundtruth = std::move(groundtruth);
  seq.frames = std::make_shared<InMemoryFrames>(std::move(frames));
  seq.validate();
  return seq;
}

}  // namespace thermotrack
