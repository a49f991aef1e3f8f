#include "doctest.h"

#include "thermotrack/data.hpp"
#include "thermotrack/translate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace thermotrack;

namespace {

Frame random_frame(std::mt19937_64& rng, int w, int h, int channels = 1) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Frame f(w, h, channels);
  for (double& v : f.pixels) v = std::round(u(rng));
  return f;
}

double mass_from(const Histogram& h, int first_bin) {
  double s = 0.0;
  for (std::size_t i = first_bin; i < h.frequency.size(); ++i) s += h.frequency[i];
  return s;
}

const MappingFn to_thermal_plus10 = MappingFn::affine(Domain::visible, Domain::thermal, 1.0, 10.0);
const MappingFn to_visible_minus10 = MappingFn::affine(Domain::thermal, Domain::visible, 1.0, -10.0);

}  // namespace

TEST_CASE("L1 loss") {
  std::mt19937_64 rng(1);
  const Frame a = random_frame(rng, 5, 4);
  CHECK(l1_loss({a}, {a}) == 0.0);
  CHECK(l1_loss({Frame(2, 2, 1, 3.0)}, {Frame(2, 2, 1, 4.0)}) == 4.0);

  const Frame b = random_frame(rng, 5, 4), c = random_frame(rng, 5, 4), d = random_frame(rng, 5, 4);
  const double base = l1_loss({a, b}, {c, d});
  CHECK(base == doctest::Approx((l1_loss({a}, {c}) + l1_loss({b}, {d})) / 2).epsilon(1e-14));
  auto scaled = [](Frame f, double k) {
    for (double& v : f.pixels) v *= k;
    return f;
  };
  CHECK(l1_loss({scaled(a, 3), scaled(b, 3)}, {scaled(c, 3), scaled(d, 3)}) ==
        doctest::Approx(3 * base).epsilon(1e-14));
  CHECK_THROWS_AS(l1_loss({a}, {Frame(4, 5)}), Error);
  CHECK_THROWS_AS(l1_loss({a}, {}), Error);
}

TEST_CASE("conditional adversarial loss") {
  CHECK(std::abs(cgan_loss({0.5}, {0.5}) + 2.0 * std::numbers::ln2) <= 1e-12);
  CHECK(std::abs(cgan_loss({0.5, 0.5, 0.5}, {0.5, 0.5}) + 2.0 * std::numbers::ln2) <= 1e-12);

  const double eps = kProbabilityEpsilon;
  const double best = cgan_loss({1.0 - eps}, {eps});
  CHECK(std::abs(best - 2.0 * std::log(1.0 - eps)) <= 1e-15);
  CHECK(std::abs(best) < 1e-6);
  // Endpoints are clamped rather than producing infinities.
  CHECK(cgan_loss({1.0}, {0.0}) == best);
  CHECK(std::isfinite(cgan_loss({0.0}, {1.0})));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> real(9), fake(6);
  for (double& v : real) v = u(rng);
  for (double& v : fake) v = u(rng);
  const double value = cgan_loss(real, fake);
  CHECK(value <= 2.0 * std::log(1.0 - eps));
  std::reverse(real.begin(), real.end());
  std::rotate(fake.begin(), fake.begin() + 2, fake.end());
  CHECK(cgan_loss(real, fake) == doctest::Approx(value).epsilon(1e-14));
  CHECK_THROWS_AS(cgan_loss({}, {0.5}), Error);
}

TEST_CASE("pix2pix objective") {
  CHECK(pix2pix_objective(-0.7, 3.0, 0.0) == -0.7);
  CHECK(pix2pix_objective(-1.0, 2.0) == 199.0);
  CHECK(pix2pix_objective(-1.0, 4.0) - pix2pix_objective(-1.0, 2.0) ==
        pix2pix_objective(-1.0, 3.0) - pix2pix_objective(-1.0, 1.0));
  CHECK_THROWS_AS(pix2pix_objective(0.0, 1.0, -1.0), Error);
}

TEST_CASE("cycle consistency loss") {
  std::mt19937_64 rng(3);
  const Batch x = {random_frame(rng, 6, 5), random_frame(rng, 6, 5, 3)};
  const Batch y = {random_frame(rng, 6, 5)};

  CHECK(cycle_loss(MappingFn::identity(Domain::visible, Domain::thermal),
                   MappingFn::identity(Domain::thermal, Domain::visible), x, y) == 0.0);
  CHECK(cycle_loss(to_thermal_plus10, to_visible_minus10, x, y) == 0.0);

  // G adds 10, F is the identity, on 4-pixel black images: each direction
  // is off by 10 at every pixel.
  const Batch zero = {Frame(2, 2, 1, 0.0)};
  CHECK(cycle_loss(to_thermal_plus10, MappingFn::identity(Domain::thermal, Domain::visible), zero, zero) == 80.0);

  // Each direction is non-negative and vanishes only for an exact inverse.
  const MappingFn lossy = MappingFn::affine(Domain::visible, Domain::thermal, 1.0, 10.0, true);
  const Batch bright = {Frame(2, 2, 1, 250.0)};
  CHECK(cycle_loss(lossy, to_visible_minus10, bright, Batch{Frame(2, 2, 1, 100.0)}) == 20.0);

  CHECK_THROWS_AS(cycle_loss(to_thermal_plus10, to_thermal_plus10, x, y), Error);
  CHECK_THROWS_AS(cycle_loss(MappingFn::identity(Domain::visible, Domain::visible),
                             MappingFn::identity(Domain::visible, Domain::visible), x, y),
                  Error);
  const MappingFn crop{Domain::visible, Domain::thermal, [](const Frame&) { return Frame(1, 1); }};
  CHECK_THROWS_AS(cycle_loss(crop, to_visible_minus10, x, y), Error);
}

TEST_CASE("translation distance") {
  std::mt19937_64 rng(4);
  Batch a, b;
  for (int i = 0; i < 3; ++i) a.push_back(random_frame(rng, 7, 6));
  CHECK(translation_distance(a, a).mean == 0.0);

  for (const Frame& f : a) {
    Frame g = f;
    for (double& v : g.pixels) v += 1.0;
    b.push_back(g);
  }
  const TranslationDistance d = translation_distance(a, b);
  CHECK(std::abs(d.mean - 1.0) <= 1e-12);
  CHECK(d.per_frame.size() == 3);

  Batch c;
  for (int i = 0; i < 3; ++i) c.push_back(random_frame(rng, 7, 6));
  CHECK(translation_distance(a, c).mean == translation_distance(c, a).mean);
  CHECK(translation_distance(a, c).mean > 0.0);

  // Frame 0 off by 3 everywhere, frame 1 exact: mean of 3 and 0.
  Batch e = {Frame(4, 4, 1, 13.0), Frame(4, 4, 1, 0.0)};
  CHECK(translation_distance(e, Batch{Frame(4, 4, 1, 10.0), Frame(4, 4, 1, 0.0)}).mean == 1.5);
  CHECK_THROWS_AS(translation_distance(a, Batch{a[0]}), Error);
}

TEST_CASE("pseudo-thermal translator") {
  CHECK(pseudo_tir(Frame(9, 7, 1, 100.0), 3) == Frame(9, 7, 1, 155.0));

  std::mt19937_64 rng(5);
  const Frame gray = random_frame(rng, 12, 10);
  CHECK(pseudo_tir(pseudo_tir(gray, 0), 0) == gray);
  const Frame rgb = random_frame(rng, 12, 10, 3);
  // RGB luma is fractional, so the double inversion is exact only to rounding.
  const Frame twice = pseudo_tir(pseudo_tir(rgb, 0), 0), luma = Frame::from_array(rgb.luma());
  for (std::size_t i = 0; i < luma.pixels.size(); ++i) CHECK(std::abs(twice.pixels[i] - luma.pixels[i]) <= 1e-12);
  CHECK(pseudo_tir(rgb, 2) == pseudo_tir(rgb, 2));

  // A single bright pixel spreads over the (2r+1)^2 window.
  Frame dot(9, 9, 1, 0.0);
  dot.at(4, 4) = 225.0;
  const Frame out = pseudo_tir(dot, 1);
  CHECK(out.at(3, 5) == doctest::Approx(230.0).epsilon(1e-14));
  CHECK(out.at(2, 4) == 255.0);

  CHECK_THROWS_AS(pseudo_tir(gray, -1), Error);
  CHECK_THROWS_AS(pseudo_tir(Frame(4, 4, 2), 1), Error);
}

TEST_CASE("pseudo-thermal translator is shift equivariant away from borders") {
  std::mt19937_64 rng(6);
  const Frame base = random_frame(rng, 30, 24);
  const int dx = 3, dy = 2, r = 2;
  Frame shifted(30, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 30; ++x) shifted.at(x, y) = base.at(std::max(0, x - dx), std::max(0, y - dy));
  const Frame a = pseudo_tir(base, r), b = pseudo_tir(shifted, r);
  for (int y = dy + 2 * r; y < 24 - r; ++y)
    for (int x = dx + 2 * r; x < 30 - r; ++x) CHECK(b.at(x, y) == doctest::Approx(a.at(x - dx, y - dy)).epsilon(1e-12));
}

TEST_CASE("pseudo-thermal output has fewer strong gradients") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Frame input = random_frame(rng, 40, 30, trial % 2 ? 3 : 1);
    const Histogram before = grad_histogram({input}, 100, 0.0, 200.0);
    const Histogram after = grad_histogram({pseudo_tir(input, 1 + trial % 3)}, 100, 0.0, 200.0);
    CHECK(mass_from(after, 50) <= mass_from(before, 50));
  }
}
