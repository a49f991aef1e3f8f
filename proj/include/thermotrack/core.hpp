#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermotrack {

/// Broad failure classes. The CLI prints the category name as the first token
/// of its error line.
enum class ErrorCategory { usage, config, io, data, numeric, geometry };

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

/// Axis-aligned box in continuous pixel coordinates; (x, y) is the top-left
/// corner.
template <typename Scalar>
struct Box {
  Scalar x = 0;
  Scalar y = 0;
  Scalar w = 1;
  Scalar h = 1;

  Box() = default;
  Box(Scalar x_, Scalar y_, Scalar w_, Scalar h_) : x(x_), y(y_), w(w_), h(h_) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h)))
      throw Error(ErrorCategory::geometry, "bounding box has non-finite coordinates");
    if (!(w > 0 && h > 0))
      throw Error(ErrorCategory::geometry, "bounding box must have positive width and height");
  }

  Scalar cx() const { return x + w / 2; }
  Scalar cy() const { return y + h / 2; }
  Scalar area() const { return w * h; }

  static Box from_center(Scalar cx, Scalar cy, Scalar w, Scalar h) {
    return Box(cx - w / 2, cy - h / 2, w, h);
  }

  Box translated(Scalar dx, Scalar dy) const { return Box(x + dx, y + dy, w, h); }

  bool operator==(const Box&) const = default;
};

using BoundingBox = Box<double>;

/// Intersection over union of two boxes, computed on continuous area.
template <typename Scalar>
Scalar iou(const Box<Scalar>& a, const Box<Scalar>& b) {
  using std::max;
  using std::min;
  const Scalar ix = max(Scalar(0), min(a.x + a.w, b.x + b.w) - max(a.x, b.x));
  const Scalar iy = max(Scalar(0), min(a.y + a.h, b.y + b.h) - max(a.y, b.y));
  const Scalar inter = ix * iy;
  if (inter <= 0) return Scalar(0);
  const Scalar uni = a.area() + b.area() - inter;
  return min(Scalar(1), inter / uni);
}

struct Polygon {
  std::array<Eigen::Vector2d, 4> corners;
};

/// Axis-aligned bounding rectangle of the polygon. Throws on zero width or
/// height.
BoundingBox polygon_to_box(const Polygon& polygon);

Polygon box_corners(const BoundingBox& box);

/// Row-major interleaved image with intensities nominally in [0, 255].
/// Values are stored as doubles and never clamped, so photometric offsets
/// are represented exactly.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> pixels;

  Frame() = default;
  Frame(int width_, int height_, int channels_ = 1, double fill = 0.0);

  double& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Frame& other) const {
    return width == other.width && height == other.height && channels == other.channels;
  }

  /// Grayscale view as a height x width array (Rec. 601 weights for RGB).
  Eigen::ArrayXXd luma() const;

  static Frame from_array(const Eigen::ArrayXXd& gray);

  bool operator==(const Frame&) const = default;
};

/// Supplies frames by index. Implementations are immutable after construction.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual Frame load(std::size_t index) const = 0;
};

class InMemoryFrames : public FrameSource {
 public:
  explicit InMemoryFrames(std::vector<Frame> frames) : frames_(std::move(frames)) {}
  std::size_t size() const override { return frames_.size(); }
  Frame load(std::size_t index) const override { return frames_.at(index); }

 private:
  std::vector<Frame> frames_;
};

using TagSet = std::set<std::string>;

struct Sequence {
  std::string name;
  std::shared_ptr<const FrameSource> frames;
  std::vector<BoundingBox> groundtruth;
  std::vector<TagSet> frame_attributes;
  TagSet sequence_attributes;

  std::size_t size() const { return groundtruth.size(); }
  Frame frame(std::size_t index) const { return frames->load(index); }

  /// Throws if the per-frame vectors disagree in length.
  void validate() const;

  static Sequence in_memory(std::string name, std::vector<Frame> frames,
                            std::vector<BoundingBox> groundtruth);
};

}  // namespace thermotrack
