#pragma once

#include "thermotrack/core.hpp"
#include "thermotrack/eco.hpp"
#include "thermotrack/features.hpp"

#include <memory>
#include <optional>
#include <utility>

namespace thermotrack {

struct TrackerConfig {
  FeatureConfig features = [] {
    FeatureConfig f;
    f.crop_factor = 4.0;  // search region; training samples share it
    return f;
  }();
  /// Label sigma as a fraction of sqrt(w h) of the target.
  double sigma_factor = 0.1;
  double reg_base = 1e-3;
  double reg_edge_ratio = 10.0;
  double lambda = 1e-7;
  double gamma = 0.003;
  int memory_capacity = 30;
  int scales = 5;
  double scale_step = 1.02;
  double scale_damping = 0.6;
  /// Frames between model updates; 0 disables updates.
  int update_interval = 5;
  int init_cg_iterations = 50;
  int update_cg_iterations = 5;
  double cg_tolerance = 1e-6;
  int gn_iterations = 5;
  bool learn_projection = false;
  /// Projected channels per layer when learning the projection; 0 keeps all.
  int projection_dims = 0;
  /// Score grid points per feature cell of the finest layer.
  int score_upsample = 2;

  void validate() const;
};

struct TrackState {
  eco::ContinuousFilter filter;
  eco::ProjectionMatrix projection;
  eco::SampleMemory memory;
  eco::InterpKernel kernel;
  std::vector<double> gains;
  eco::SpatialRegularizer reg;
  Eigen::MatrixXcd label;
  BoundingBox box;
  double base_w = 1.0;
  double base_h = 1.0;
  double scale = 1.0;
  int frame_index = 0;
  int frames_since_update = 0;
  int last_scale_index = 0;
  Frame last_frame;

  double region_side(const TrackerConfig& cfg) const;
};

/// Learns the first model from `box` on `frame`. The motion layer, when
/// enabled, compares against `previous` or, lacking one, the frame itself.
TrackState init(const Frame& frame, const BoundingBox& box, const TrackerConfig& cfg,
                const Frame* previous = nullptr);

/// Localizes the target in the next frame and updates the model in place.
BoundingBox step(TrackState& state, const Frame& frame, const TrackerConfig& cfg);

struct SubgridOffset {
  double dy = 0.0;
  double dx = 0.0;
  bool flagged = false;  // fit was not a maximum
};

/// Stationary point of a least-squares quadratic over the 3 x 3 neighbourhood
/// of (row, col), neighbours wrapping periodically, clamped to half a cell.
SubgridOffset refine_subgrid(const Eigen::MatrixXd& grid, Eigen::Index row, Eigen::Index col);

/// One trajectory line: `x,y,w,h` with 4 decimals, no newline.
std::string format_trajectory_line(const BoundingBox& box);

/// Mean removal for the intensity layer and a Hann window on every layer.
void condition_stack(FeatureStack& stack, const FeatureConfig& features, bool has_previous);

/// Per-layer gains fixed at initialization so that scores stay comparable
/// across frames and scales. Appearance layers get unit mean power on the
/// conditioned first sample; the motion layer gets the gain at which a fully
/// moving region covering `target_fraction` of the patch has unit power.
std::vector<double> layer_gains(const FeatureStack& conditioned, const FeatureConfig& features, bool has_previous,
                                double target_fraction);

void apply_gains(FeatureStack& stack, const std::vector<double>& gains);

/// Frame-by-frame tracker interface used by the evaluation harness.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual void start(const Frame& frame, const BoundingBox& box, const Frame* previous) = 0;
  virtual BoundingBox update(const Frame& frame) = 0;
};

class EcoTracker : public Tracker {
 public:
  explicit EcoTracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
  void start(const Frame& frame, const BoundingBox& box, const Frame* previous) override;
  BoundingBox update(const Frame& frame) override;
  const std::optional<TrackState>& state() const { return state_; }

 private:
  TrackerConfig cfg_;
  std::optional<TrackState> state_;
};

}  // namespace thermotrack
