#include "thermotrack/tracker.hpp"

#include "thermotrack/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace thermotrack {
namespace {

double wrap_period(double t) { return t - std::floor(t + 0.5); }

Eigen::VectorXd hann(Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / static_cast<double>(n + 1));
  return w;
}

// Least-squares quadratic a + b x + c y + d x^2 + e x y + g y^2 on the 3 x 3 stencil.
const Eigen::Matrix<double, 6, 9>& quadratic_fit() {
  static const Eigen::Matrix<double, 6, 9> pinv = [] {
    Eigen::Matrix<double, 9, 6> A;
    int k = 0;
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x, ++k) A.row(k) << 1, x, y, x * x, x * y, y * y;
    return Eigen::Matrix<double, 6, 9>((A.transpose() * A).inverse() * A.transpose());
  }();
  return pinv;
}

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  double tv = 0.0;
  double tu = 0.0;
  int scale_index = 0;
};

eco::Sample extract_sample(const Frame& frame, const Frame* previous, double cx, double cy, double side,
                           const TrackerConfig& cfg, const TrackState& s) {
  FeatureStack stack = build_stack(frame, previous, cx, cy, side, cfg.features);
  condition_stack(stack, cfg.features, previous != nullptr);
  apply_gains(stack, s.gains);
  return eco::interpolate(stack, s.kernel);
}

double clamp_center(double v, int extent) { return std::clamp(v, 0.0, static_cast<double>(extent)); }

}  // namespace

void TrackerConfig::validate() const {
  features.validate();
  if (scales < 1 || scales % 2 == 0) throw Error(ErrorCategory::config, "scales: S odd and at least 1 required");
  if (!(scale_step > 1.0)) throw Error(ErrorCategory::config, "scale_step must exceed 1");
  if (!(scale_damping > 0.0 && scale_damping <= 1.0))
    throw Error(ErrorCategory::config, "scale_damping must lie in (0, 1]");
  if (update_interval < 0) throw Error(ErrorCategory::config, "update_interval must be non-negative");
  if (!(sigma_factor > 0.0)) throw Error(ErrorCategory::config, "sigma_factor must be positive");
  if (!(reg_base > 0.0)) throw Error(ErrorCategory::config, "reg_base must be positive");
  if (!(reg_edge_ratio >= 1.0)) throw Error(ErrorCategory::config, "reg_edge_ratio must be at least 1");
  if (!(lambda >= 0.0)) throw Error(ErrorCategory::config, "lambda must be non-negative");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCategory::config, "gamma must lie in (0, 1)");
  if (memory_capacity < 1) throw Error(ErrorCategory::config, "memory_capacity must be at least 1");
  if (init_cg_iterations < 0 || update_cg_iterations < 0 || gn_iterations < 0)
    throw Error(ErrorCategory::config, "iteration budgets must be non-negative");
  if (!(cg_tolerance > 0.0)) throw Error(ErrorCategory::config, "cg_tolerance must be positive");
  if (projection_dims < 0) throw Error(ErrorCategory::config, "projection_dims must be non-negative");
  if (score_upsample < 1) throw Error(ErrorCategory::config, "score_upsample must be at least 1");
}

double TrackState::region_side(const TrackerConfig& cfg) const {
  return cfg.features.crop_factor * std::max(base_w, base_h) * scale;
}

void condition_stack(FeatureStack& stack, const FeatureConfig& features, bool has_previous) {
  const std::vector<ChannelKind> kinds = features.layer_kinds(has_previous);
  for (std::size_t d = 0; d < stack.layers.size(); ++d) {
    FeatureChannelMap& layer = stack.layers[d];
    const Eigen::VectorXd w = hann(layer.size());
    const Eigen::MatrixXd window = w * w.transpose();
    for (auto& c : layer.channels) {
      if (kinds[d] == ChannelKind::intensity) c.array() -= c.mean();
      c = c.cwiseProduct(window);
    }
  }
}

std::vector<double> layer_gains(const FeatureStack& conditioned, const FeatureConfig& features, bool has_previous,
                                double target_fraction) {
  if (!(target_fraction > 0.0)) throw Error(ErrorCategory::geometry, "target fraction must be positive");
  const std::vector<ChannelKind> kinds = features.layer_kinds(has_previous);
  std::vector<double> gains;
  for (std::size_t d = 0; d < conditioned.layers.size(); ++d) {
    const FeatureChannelMap& layer = conditioned.layers[d];
    if (kinds[d] == ChannelKind::motion) {
      gains.push_back(1.0 / std::sqrt(std::min(1.0, target_fraction)));
      continue;
    }
    double power = 0.0;
    for (const auto& c : layer.channels) power += c.squaredNorm();
    const double count = static_cast<double>(layer.channels.size()) * layer.size() * layer.size();
    gains.push_back(power > 1e-20 * count ? std::sqrt(count / power) : 1.0);
  }
  return gains;
}

void apply_gains(FeatureStack& stack, const std::vector<double>& gains) {
  if (gains.size() != stack.layers.size())
    throw Error(ErrorCategory::data, "gain count does not match the feature layers");
  for (std::size_t d = 0; d < gains.size(); ++d)
    for (auto& c : stack.layers[d].channels) c *= gains[d];
}

TrackState init(const Frame& frame, const BoundingBox& box, const TrackerConfig& cfg, const Frame* previous) {
  cfg.validate();
  if (!(box.cx() >= 0 && box.cx() <= frame.width && box.cy() >= 0 && box.cy() <= frame.height))
    throw Error(ErrorCategory::geometry, "initial box centre lies outside the frame");
  if (box.w < 1.0 || box.h < 1.0) throw Error(ErrorCategory::geometry, "initial box is smaller than a pixel");

  TrackState s;
  s.box = box;
  s.base_w = box.w;
  s.base_h = box.h;
  s.last_frame = frame;
  const double side = s.region_side(cfg);

  const Frame* motion_ref = cfg.features.motion.enabled ? (previous ? previous : &frame) : nullptr;
  FeatureStack stack = build_stack(frame, motion_ref, box.cx(), box.cy(), side, cfg.features);
  condition_stack(stack, cfg.features, motion_ref != nullptr);
  s.gains = layer_gains(stack, cfg.features, motion_ref != nullptr, box.w * box.h / (side * side));
  apply_gains(stack, s.gains);
  s.kernel = eco::InterpKernel::for_stack(stack);
  const eco::Sample sample = eco::interpolate(stack, s.kernel);

  s.label = eco::label_coeffs(s.kernel.max_bandwidth(), cfg.sigma_factor * std::sqrt(box.w * box.h) / side);
  s.reg = eco::spatial_reg_for_target(cfg.reg_base, box.w / 2.0 / side, box.h / 2.0 / side, cfg.reg_edge_ratio);
  s.memory = eco::SampleMemory(cfg.memory_capacity, cfg.gamma);
  s.memory.insert(sample, s.label);

  eco::GnOptions gn;
  gn.outer_iterations = cfg.gn_iterations;
  gn.cg_iterations = cfg.init_cg_iterations;
  gn.tolerance = cfg.cg_tolerance;
  gn.lambda = cfg.lambda;
  gn.freeze_projection = !cfg.learn_projection;
  if (cfg.projection_dims > 0)
    for (const auto& layer : sample) gn.output_dims.push_back(std::min(cfg.projection_dims, layer.channel_count()));
  if (gn.freeze_projection) gn.outer_iterations = 1;  // one filter solve with the first-frame budget
  eco::GnResult learned = eco::learn_joint_gn(s.memory, s.reg, gn);
  s.filter = std::move(learned.filter);
  s.projection = std::move(learned.projection);
  return s;
}

std::string format_trajectory_line(const BoundingBox& box) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f", box.x, box.y, box.w, box.h);
  return buf;
}

SubgridOffset refine_subgrid(const Eigen::MatrixXd& grid, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index R = grid.rows(), C = grid.cols();
  Eigen::Matrix<double, 9, 1> v;
  int k = 0;
  for (int y = -1; y <= 1; ++y)
    for (int x = -1; x <= 1; ++x, ++k) v(k) = grid(((row + y) % R + R) % R, ((col + x) % C + C) % C);
  const Eigen::Matrix<double, 6, 1> p = quadratic_fit() * v;
  const double b = p(1), c = p(2), d = p(3), e = p(4), g = p(5);
  const double det = 4.0 * d * g - e * e;
  if (!(d < 0.0 && det > 0.0)) return {0.0, 0.0, true};
  const double dx = (-2.0 * g * b + e * c) / det;
  const double dy = (-2.0 * d * c + e * b) / det;
  return {std::clamp(dy, -0.5, 0.5), std::clamp(dx, -0.5, 0.5), false};
}

BoundingBox step(TrackState& s, const Frame& frame, const TrackerConfig& cfg) {
  if (!frame.same_shape(s.last_frame))
    throw Error(ErrorCategory::data, "frame size differs from the frames seen so far");
  const Frame* motion_ref = cfg.features.motion.enabled ? &s.last_frame : nullptr;
  const double cx = clamp_center(s.box.cx(), frame.width), cy = clamp_center(s.box.cy(), frame.height);
  const double side = s.region_side(cfg);

  int finest = 0;
  for (int n : s.kernel.grid) finest = std::max(finest, n);
  const int n = std::max(cfg.score_upsample * finest, 2 * s.kernel.max_bandwidth() + 1);

  Candidate best;
  const int half = (cfg.scales - 1) / 2;
  for (int si = -half; si <= half; ++si) {
    const double side_s = side * std::pow(cfg.scale_step, si);
    const eco::Sample sample = extract_sample(frame, motion_ref, cx, cy, side_s, cfg, s);
    const eco::ScoreFunction score = eco::score(s.filter, s.projection, sample);
    const Eigen::MatrixXd grid = score.sample_grid(n);
    Eigen::Index r, c;
    grid.maxCoeff(&r, &c);
    const SubgridOffset off = refine_subgrid(grid, r, c);
    const double tv = wrap_period((r + off.dy) / n), tu = wrap_period((c + off.dx) / n);
    const double value = off.flagged ? grid(r, c) : score(tv, tu);
    log::debug("scale " + std::to_string(si) + ": score " + std::to_string(value));
    if (value > best.value) best = {value, tv, tu, si};
  }

  s.scale *= std::pow(cfg.scale_step, cfg.scale_damping * best.scale_index);
  const double side_best = side * std::pow(cfg.scale_step, best.scale_index);
  const double new_cx = clamp_center(cx + best.tu * side_best, frame.width);
  const double new_cy = clamp_center(cy + best.tv * side_best, frame.height);
  s.box = BoundingBox::from_center(new_cx, new_cy, s.base_w * s.scale, s.base_h * s.scale);
  s.last_scale_index = best.scale_index;
  ++s.frame_index;

  if (cfg.update_interval > 0 && ++s.frames_since_update >= cfg.update_interval) {
    s.memory.insert(extract_sample(frame, motion_ref, new_cx, new_cy, s.region_side(cfg), cfg, s), s.label);
    s.filter = eco::solve_filter_cg(s.memory, s.projection, s.reg, s.filter,
                                    {cfg.update_cg_iterations, cfg.cg_tolerance, true});
    s.frames_since_update = 0;
  }
  s.last_frame = frame;
  return s.box;
}

void EcoTracker::start(const Frame& frame, const BoundingBox& box, const Frame* previous) {
  state_ = init(frame, box, cfg_, previous);
}

BoundingBox EcoTracker::update(const Frame& frame) {
  if (!state_) throw Error(ErrorCategory::usage, "tracker updated before it was started");
  return step(*state_, frame, cfg_);
}

}  // namespace thermotrack
