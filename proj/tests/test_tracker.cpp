#include "doctest.h"

#include "thermotrack/data.hpp"
#include "thermotrack/tracker.hpp"

#include <cmath>

using namespace thermotrack;

namespace {

SynthSpec square_spec() {
  SynthSpec s;
  s.width = 160;
  s.height = 120;
  s.target_w = 24;
  s.target_h = 24;
  s.start_x = 80;
  s.start_y = 60;
  s.foreground = 200;
  s.background = 60;
  return s;
}

double center_error(const BoundingBox& a, const BoundingBox& b) {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

bool same_filter(const eco::ContinuousFilter& a, const eco::ContinuousFilter& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (a[d].channels.size() != b[d].channels.size()) return false;
    for (std::size_t c = 0; c < a[d].channels.size(); ++c)
      if (a[d].channels[c] != b[d].channels[c]) return false;
  }
  return true;
}

// Quadratic peak value - (x - x0)^2 - 2 (y - y0)^2 + 0.5 (x - x0)(y - y0), sampled on a grid.
Eigen::MatrixXd quadratic_grid(int n, double row0, double col0) {
  Eigen::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double y = r - row0, x = c - col0;
      g(r, c) = 10.0 - x * x - 2.0 * y * y + 0.5 * x * y;
    }
  return g;
}

}  // namespace

TEST_CASE("configuration validation") {
  TrackerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.scales = 4;
  try {
    cfg.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::config);
    CHECK(std::string(e.what()).find("S odd") != std::string::npos);
  }
  cfg = TrackerConfig{};
  cfg.scale_step = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrackerConfig{};
  cfg.update_interval = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("self-response peaks at the target centre") {
  const Sequence seq = render_sequence(square_spec());
  TrackerConfig cfg;
  const TrackState s = init(seq.frame(0), seq.groundtruth[0], cfg);

  const bool motion = cfg.features.motion.enabled;
  const Frame frame = seq.frame(0);
  FeatureStack stack = build_stack(frame, motion ? &frame : nullptr, seq.groundtruth[0], cfg.features);
  condition_stack(stack, cfg.features, motion);
  apply_gains(stack, s.gains);
  const eco::ScoreFunction score = eco::score(s.filter, s.projection, eco::interpolate(stack, s.kernel));
  int finest = 0;
  for (int n : s.kernel.grid) finest = std::max(finest, n);
  const int n = 4 * finest;
  const Eigen::MatrixXd grid = score.sample_grid(n);
  Eigen::Index r, c;
  grid.maxCoeff(&r, &c);
  auto wrapped = [n](Eigen::Index i) { return static_cast<double>(i >= n / 2 ? i - n : i); };
  // Offsets in feature cells of the finest layer.
  CHECK(std::abs(wrapped(r)) * finest / n <= 0.5);
  CHECK(std::abs(wrapped(c)) * finest / n <= 0.5);
}

TEST_CASE("a single scale keeps the scale at one") {
  SynthSpec spec = square_spec();
  spec.length = 4;
  spec.motion = MotionModel::linear;
  spec.velocity_x = 2.0;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  cfg.scales = 1;
  TrackState s = init(seq.frame(0), seq.groundtruth[0], cfg);
  CHECK(s.scale == 1.0);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const BoundingBox b = step(s, seq.frame(t), cfg);
    CHECK(s.scale == 1.0);
    CHECK(b.w == spec.target_w);
    CHECK(b.h == spec.target_h);
  }
}

TEST_CASE("initialization is deterministic") {
  SynthSpec spec = square_spec();
  spec.noise_sigma = 5.0;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  cfg.learn_projection = true;
  cfg.projection_dims = 4;
  const TrackState a = init(seq.frame(0), seq.groundtruth[0], cfg);
  const TrackState b = init(seq.frame(0), seq.groundtruth[0], cfg);
  CHECK(same_filter(a.filter, b.filter));
  for (std::size_t d = 0; d < a.projection.layers.size(); ++d) CHECK(a.projection.layers[d] == b.projection.layers[d]);
  CHECK(a.label == b.label);
  CHECK(a.box == b.box);
}

TEST_CASE("a static target does not drift") {
  SynthSpec spec = square_spec();
  spec.length = 50;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  EcoTracker tracker(cfg);
  tracker.start(seq.frame(0), seq.groundtruth[0], nullptr);
  double worst = 0.0;
  for (std::size_t t = 1; t < seq.size(); ++t)
    worst = std::max(worst, center_error(tracker.update(seq.frame(t)), seq.groundtruth[t]));
  CHECK(worst <= 0.5);
}

TEST_CASE("a target moving 3 px per frame is localized within a pixel") {
  SynthSpec spec = square_spec();
  spec.width = 240;
  spec.start_x = 40;
  spec.length = 50;
  spec.motion = MotionModel::linear;
  spec.velocity_x = 3.0;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  EcoTracker tracker(cfg);
  tracker.start(seq.frame(0), seq.groundtruth[0], nullptr);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const BoundingBox b = tracker.update(seq.frame(t));
    CHECK_MESSAGE(center_error(b, seq.groundtruth[t]) <= 1.0, "frame " << t);
  }
}

// A flat blob gives almost no scale cue at a 2% step; the target carries a
// pattern that grows with it and is large enough for a 2% change to move its
// edges by about a pixel.
TEST_CASE("a target growing by the scale step selects the next scale") {
  SynthSpec spec = square_spec();
  spec.width = 400;
  spec.height = 400;
  spec.start_x = 200;
  spec.start_y = 200;
  spec.target_w = 50;
  spec.target_h = 50;
  spec.texture = 40;
  spec.length = 30;
  spec.scale_per_frame = 1.02;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  cfg.scales = 5;
  cfg.scale_step = 1.02;
  cfg.scale_damping = 1.0;
  TrackState s = init(seq.frame(0), seq.groundtruth[0], cfg);
  int hits = 0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    step(s, seq.frame(t), cfg);
    hits += s.last_scale_index == 1;
  }
  CHECK(hits >= 0.9 * (seq.size() - 1));
}

TEST_CASE("subgrid refinement") {
  SUBCASE("symmetric peak stays put") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
    g(2, 2) = 1.0;
    const SubgridOffset off = refine_subgrid(g, 2, 2);
    CHECK_FALSE(off.flagged);
    CHECK(std::abs(off.dx) < 1e-15);
    CHECK(std::abs(off.dy) < 1e-15);
  }
  SUBCASE("analytic quadratic peak is recovered") {
    const Eigen::MatrixXd g = quadratic_grid(7, 3.0 - 0.2, 3.0 + 0.3);
    const SubgridOffset off = refine_subgrid(g, 3, 3);
    CHECK_FALSE(off.flagged);
    CHECK(std::abs(off.dx - 0.3) <= 1e-9);
    CHECK(std::abs(off.dy + 0.2) <= 1e-9);
  }
  SUBCASE("neighbours wrap around the grid edge") {
    // Peak at row 0.1 in periodic coordinates; the fit at row 0 needs row 6 above it.
    Eigen::MatrixXd g(7, 7);
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) {
        const double y = (r > 3 ? r - 7 : r) - 0.1, x = c - 3.0;
        g(r, c) = 10.0 - x * x - 2.0 * y * y + 0.5 * x * y;
      }
    const SubgridOffset off = refine_subgrid(g, 0, 3);
    CHECK_FALSE(off.flagged);
    CHECK(std::abs(off.dy - 0.1) <= 1e-9);
    CHECK(std::abs(off.dx) <= 1e-9);
  }
  SUBCASE("a saddle is flagged") {
    Eigen::MatrixXd g(3, 3);
    g << 0, -1, 0,
         1, 0, 1,
         0, -1, 0;
    const SubgridOffset off = refine_subgrid(g, 1, 1);
    CHECK(off.flagged);
    CHECK(off.dx == 0.0);
    CHECK(off.dy == 0.0);
  }
  SUBCASE("offsets are clamped to half a cell") {
    Eigen::MatrixXd g(3, 3);
    g << 0, 1, 2,
         0, 1, 2.1,
         0, 1, 2;
    const SubgridOffset off = refine_subgrid(g, 1, 1);
    if (!off.flagged) CHECK(std::abs(off.dx) <= 0.5);
  }
}

TEST_CASE("a constant intensity offset leaves the trajectory unchanged") {
  SynthSpec spec = square_spec();
  spec.length = 20;
  spec.motion = MotionModel::linear;
  spec.velocity_x = 1.5;
  spec.velocity_y = -1.0;
  spec.noise_sigma = 3.0;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  cfg.features.motion.enabled = true;
  EcoTracker plain(cfg), shifted(cfg);
  auto offset = [](Frame f) {
    for (double& p : f.pixels) p += 37.0;
    return f;
  };
  plain.start(seq.frame(0), seq.groundtruth[0], nullptr);
  shifted.start(offset(seq.frame(0)), seq.groundtruth[0], nullptr);
  double worst = 0.0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const BoundingBox a = plain.update(seq.frame(t)), b = shifted.update(offset(seq.frame(t)));
    worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.w - b.w), std::abs(a.h - b.h)});
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("disabling updates keeps the first-frame filter") {
  SynthSpec spec = square_spec();
  spec.length = 12;
  spec.motion = MotionModel::linear;
  spec.velocity_x = 1.0;
  const Sequence seq = render_sequence(spec);
  TrackerConfig cfg;
  cfg.update_interval = 0;
  TrackState s = init(seq.frame(0), seq.groundtruth[0], cfg);
  const eco::ContinuousFilter first = s.filter;
  for (std::size_t t = 1; t < seq.size(); ++t) step(s, seq.frame(t), cfg);
  CHECK(same_filter(s.filter, first));
  CHECK(s.memory.size() == 1);

  cfg.update_interval = 5;
  TrackState u = init(seq.frame(0), seq.groundtruth[0], cfg);
  for (std::size_t t = 1; t < seq.size(); ++t) step(u, seq.frame(t), cfg);
  CHECK(u.memory.size() == 3);
  CHECK_FALSE(same_filter(u.filter, first));
}

TEST_CASE("boxes stay finite and positive through occlusion and clutter") {
  SynthSpec spec = square_spec();
  spec.length = 40;
  spec.motion = MotionModel::sinusoidal;
  spec.amplitude_x = 40;
  spec.amplitude_y = 20;
  spec.period = 40;
  spec.noise_sigma = 20.0;
  spec.distractors = 3;
  spec.occluder = OccluderSpec{10, 25, BoundingBox(0, 0, 160, 120), 60.0};
  const Sequence seq = render_sequence(spec);
  EcoTracker tracker(TrackerConfig{});
  tracker.start(seq.frame(0), seq.groundtruth[0], nullptr);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const BoundingBox b = tracker.update(seq.frame(t));
    CHECK(std::isfinite(b.x));
    CHECK(std::isfinite(b.y));
    CHECK(b.w > 0.0);
    CHECK(b.h > 0.0);
    CHECK(b.cx() >= 0.0);
    CHECK(b.cx() <= spec.width);
    CHECK(b.cy() >= 0.0);
    CHECK(b.cy() <= spec.height);
  }
}

TEST_CASE("tracker rejects bad input") {
  const Sequence seq = render_sequence(square_spec());
  TrackerConfig cfg;
  CHECK_THROWS_AS(init(seq.frame(0), BoundingBox(500, 500, 10, 10), cfg), Error);
  CHECK_THROWS_AS(init(seq.frame(0), BoundingBox(10, 10, 0.5, 10), cfg), Error);
  TrackState s = init(seq.frame(0), seq.groundtruth[0], cfg);
  CHECK_THROWS_AS(step(s, Frame(100, 100), cfg), Error);
  EcoTracker idle(cfg);
  CHECK_THROWS_AS(idle.update(seq.frame(0)), Error);
}

TEST_CASE("trajectory lines carry four decimals") {
  CHECK(format_trajectory_line(BoundingBox(1.5, 2.25, 10, 20.123456)) == "1.5000,2.2500,10.0000,20.1235");
  CHECK(format_trajectory_line(BoundingBox(-3, 0, 1, 1)) == "-3.0000,0.0000,1.0000,1.0000");
}
