// Felzenszwalb-style HOG (the 31-dimensional variant used by the DPM detector
// and most correlation-filter trackers). Votes are split linearly between the
// two nearest orientations, as in the common fhog implementation; hard
// snapping flips between bins on axis-aligned edges under sub-pixel changes.

#include "thermotrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermotrack {
namespace {

constexpr int kOrientations = 18;
constexpr int kHalfOrientations = 9;
constexpr double kEps = 1e-4;
constexpr double kTruncation = 0.2;
constexpr double kTextureWeight = 0.2357;

}  // namespace

FeatureChannelMap hog_channels(const Frame& patch, int cell) {
  if (cell < 1) throw Error(ErrorCategory::data, "HOG cell size must be positive");
  if (patch.width < 3 * cell || patch.height < 3 * cell)
    throw Error(ErrorCategory::data, "HOG patch must be at least three cells wide");

  const int blocks_x = patch.width / cell;
  const int blocks_y = patch.height / cell;
  const int visible_x = blocks_x * cell;
  const int visible_y = blocks_y * cell;
  const int out_x = blocks_x - 2;
  const int out_y = blocks_y - 2;

  // hist[(by * blocks_x + bx) * 18 + o]
  std::vector<double> hist(static_cast<std::size_t>(blocks_x) * blocks_y * kOrientations, 0.0);
  auto bin = [&](int bx, int by) { return &hist[(static_cast<std::size_t>(by) * blocks_x + bx) * kOrientations]; };

  for (int y = 1; y < visible_y - 1; ++y) {
    for (int x = 1; x < visible_x - 1; ++x) {
      const int px = std::min(x, patch.width - 2);
      const int py = std::min(y, patch.height - 2);

      // Strongest channel wins for multi-channel patches.
      double dx = 0.0, dy = 0.0, mag2 = -1.0;
      for (int c = 0; c < patch.channels; ++c) {
        const double gx = patch.at(px + 1, py, c) - patch.at(px - 1, py, c);
        const double gy = patch.at(px, py + 1, c) - patch.at(px, py - 1, c);
        const double m = gx * gx + gy * gy;
        if (m > mag2) {
          mag2 = m;
          dx = gx;
          dy = gy;
        }
      }

      const double mag = std::sqrt(mag2);
      if (mag == 0.0) continue;
      double angle = std::atan2(dy, dx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      const double pos = angle / (std::numbers::pi / kHalfOrientations);
      const int o0 = static_cast<int>(std::floor(pos)) % kOrientations;
      const int o1 = (o0 + 1) % kOrientations;
      const double w1 = pos - std::floor(pos), w0 = 1.0 - w1;
      auto vote = [&](double* h, double weight) {
        h[o0] += w0 * weight;
        h[o1] += w1 * weight;
      };

      // Bilinear vote into the four surrounding cells.
      const double xp = (x + 0.5) / cell - 0.5;
      const double yp = (y + 0.5) / cell - 0.5;
      const int ixp = static_cast<int>(std::floor(xp));
      const int iyp = static_cast<int>(std::floor(yp));
      const double vx0 = xp - ixp, vy0 = yp - iyp;
      const double vx1 = 1.0 - vx0, vy1 = 1.0 - vy0;
      if (ixp >= 0 && iyp >= 0) vote(bin(ixp, iyp), vx1 * vy1 * mag);
      if (ixp + 1 < blocks_x && iyp >= 0) vote(bin(ixp + 1, iyp), vx0 * vy1 * mag);
      if (ixp >= 0 && iyp + 1 < blocks_y) vote(bin(ixp, iyp + 1), vx1 * vy0 * mag);
      if (ixp + 1 < blocks_x && iyp + 1 < blocks_y)
        vote(bin(ixp + 1, iyp + 1), vx0 * vy0 * mag);
    }
  }

  // Energy of the contrast-insensitive histogram per cell.
  Eigen::MatrixXd norm(blocks_y, blocks_x);
  for (int by = 0; by < blocks_y; ++by) {
    for (int bx = 0; bx < blocks_x; ++bx) {
      const double* h = bin(bx, by);
      double s = 0.0;
      for (int o = 0; o < kHalfOrientations; ++o) {
        const double v = h[o] + h[o + kHalfOrientations];
        s += v * v;
      }
      norm(by, bx) = s;
    }
  }

  FeatureChannelMap out;
  out.channels.assign(kOrientations + kHalfOrientations + 4, Eigen::MatrixXd::Zero(out_y, out_x));
  auto block_norm = [&](int y0, int x0) {
    return 1.0 / std::sqrt(norm(y0, x0) + norm(y0, x0 + 1) + norm(y0 + 1, x0) +
                           norm(y0 + 1, x0 + 1) + kEps);
  };

  for (int y = 0; y < out_y; ++y) {
    for (int x = 0; x < out_x; ++x) {
      const double n1 = block_norm(y + 1, x + 1);
      const double n2 = block_norm(y, x + 1);
      const double n3 = block_norm(y + 1, x);
      const double n4 = block_norm(y, x);
      const double* src = bin(x + 1, y + 1);
      double t1 = 0, t2 = 0, t3 = 0, t4 = 0;

      for (int o = 0; o < kOrientations; ++o) {
        const double h1 = std::min(src[o] * n1, kTruncation);
        const double h2 = std::min(src[o] * n2, kTruncation);
        const double h3 = std::min(src[o] * n3, kTruncation);
        const double h4 = std::min(src[o] * n4, kTruncation);
        out.channels[o](y, x) = 0.5 * (h1 + h2 + h3 + h4);
        t1 += h1;
        t2 += h2;
        t3 += h3;
        t4 += h4;
      }
      for (int o = 0; o < kHalfOrientations; ++o) {
        const double sum = src[o] + src[o + kHalfOrientations];
        const double h1 = std::min(sum * n1, kTruncation);
        const double h2 = std::min(sum * n2, kTruncation);
        const double h3 = std::min(sum * n3, kTruncation);
        const double h4 = std::min(sum * n4, kTruncation);
        out.channels[kOrientations + o](y, x) = 0.5 * (h1 + h2 + h3 + h4);
      }
      out.channels[27](y, x) = kTextureWeight * t1;
      out.channels[28](y, x) = kTextureWeight * t2;
      out.channels[29](y, x) = kTextureWeight * t3;
      out.channels[30](y, x) = kTextureWeight * t4;
    }
  }
  return out;
}

}  // namespace thermotrack
