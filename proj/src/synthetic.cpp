#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hpfs/dataset.hpp"
#include "hpfs/random.hpp"

namespace hpfs {

namespace {

struct Canvas {
  int size;
  std::vector<double> v;

  explicit Canvas(int n) : size(n), v(static_cast<std::size_t>(n) * n, 0.0) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * size + c]; }
};

void paint_grain(Canvas& img, Rng& rng) {
  const double base = uniform(rng, 115.0, 165.0);
  const double amp = uniform(rng, 12.0, 30.0);
  const double theta = uniform(rng, -0.35, 0.35);
  const double freq = uniform(rng, 0.08, 0.22);
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double warp_amp = uniform(rng, 0.5, 2.5);
  const double warp_freq = uniform(rng, 0.02, 0.06);
  const double tilt = uniform(rng, -0.6, 0.6);  // slow brightness ramp
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int r = 0; r < img.size; ++r) {
    for (int c = 0; c < img.size; ++c) {
      const double across = -c * st + r * ct;
      const double along = c * ct + r * st;
      const double warp = warp_amp * std::sin(2.0 * std::numbers::pi * warp_freq * along);
      img.at(r, c) = base + tilt * (c - img.size / 2.0) +
                     amp * std::sin(2.0 * std::numbers::pi * freq * across + phase + warp);
    }
  }
}

void paint_knot(Canvas& img, Rng& rng, double depth_lo, double depth_hi) {
  const double cr = uniform(rng, 0.0, img.size - 1.0);
  const double cc = uniform(rng, 0.0, img.size - 1.0);
  const double radius = uniform(rng, 2.5, 0.11 * img.size + 2.5);
  const double aspect = uniform(rng, 1.0, 2.2);
  const double depth = uniform(rng, depth_lo, depth_hi);
  const int reach = static_cast<int>(std::ceil(3.0 * radius * aspect));
  for (int r = std::max(0, static_cast<int>(cr) - reach);
       r <= std::min(img.size - 1, static_cast<int>(cr) + reach); ++r) {
    for (int c = std::max(0, static_cast<int>(cc) - reach);
         c <= std::min(img.size - 1, static_cast<int>(cc) + reach); ++c) {
      const double dr = (r - cr) / radius;
      const double dc = (c - cc) / (radius * aspect);
      const double d2 = dr * dr + dc * dc;
      // dark core with a lighter ring, as knots show in sawn boards
      img.at(r, c) -= depth * std::exp(-0.5 * d2 * 2.0) - 0.15 * depth * std::exp(-0.5 * (d2 - 1.5) * (d2 - 1.5));
    }
  }
}

void paint_crack(Canvas& img, Rng& rng) {
  const double theta = uniform(rng, -0.25, 0.25);
  const double offset = uniform(rng, 0.15, 0.85) * img.size;
  const double half_width = uniform(rng, 0.5, 1.4);
  const double depth = uniform(rng, 35.0, 80.0);
  const double start = uniform(rng, 0.0, 0.5) * img.size;
  const double length = uniform(rng, 0.35, 1.0) * img.size;
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int r = 0; r < img.size; ++r) {
    for (int c = 0; c < img.size; ++c) {
      const double along = c * ct + r * st;
      if (along < start || along > start + length) continue;
      const double across = -c * st + r * ct - offset;
      const double w = std::abs(across) / half_width;
      if (w < 2.5) img.at(r, c) -= depth * std::exp(-0.5 * w * w);
    }
  }
}

GrayImage render(Canvas& img, Rng& rng) {
  const double noise = uniform(rng, 3.0, 12.0);
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<std::uint8_t> px(img.v.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double value = std::round(img.v[i] + gauss(rng));
    px[i] = static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0));
  }
  return GrayImage(img.size, img.size, std::move(px));
}

GrayImage make_texture(ClassLabel label, int size, Rng& rng) {
  Canvas img(size);
  paint_grain(img, rng);
  std::uniform_int_distribution<int> pick;
  switch (label) {
    case ClassLabel::A:
      // occasionally a faint pin knot
      if (uniform01(rng) < 0.3) paint_knot(img, rng, 15.0, 40.0);
      break;
    case ClassLabel::B: {
      const int knots = pick(rng, decltype(pick)::param_type(1, 3));
      for (int i = 0; i < knots; ++i) paint_knot(img, rng, 30.0, 80.0);
      if (uniform01(rng) < 0.2) paint_crack(img, rng);
      break;
    }
    case ClassLabel::C: {
      const int knots = pick(rng, decltype(pick)::param_type(2, 6));
      for (int i = 0; i < knots; ++i) paint_knot(img, rng, 40.0, 95.0);
      const int cracks = pick(rng, decltype(pick)::param_type(0, 2));
      for (int i = 0; i < cracks; ++i) paint_crack(img, rng);
      break;
    }
  }
  return render(img, rng);
}

}  // namespace

SyntheticTextures generate_synthetic_textures(int n_per_class, int image_size,
                                              std::uint64_t seed) {
  if (n_per_class <= 0) throw std::invalid_argument("n_per_class must be positive");
  if (image_size < 16) throw std::invalid_argument("image_size must be at least 16");
  SyntheticTextures out;
  out.images.reserve(static_cast<std::size_t>(n_per_class) * kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = label_from_index(c);
    for (int i = 0; i < n_per_class; ++i) {
      Rng rng = make_rng({seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)});
      out.images.push_back(make_texture(label, image_size, rng));
      out.labels.push_back(label);
    }
  }
  return out;
}

}  // namespace hpfs
