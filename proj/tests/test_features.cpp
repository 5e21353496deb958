#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hpfs/features.hpp"
#include "hpfs/serial.hpp"
#include "oracles.hpp"

using namespace hpfs;

namespace {

CooccurrenceMatrix matrix(int levels, std::vector<double> p) { return {levels, std::move(p)}; }

GrayImage checkerboard(int size) {
  GrayImage img(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) img.at(r, c) = static_cast<std::uint8_t>((r + c) % 2);
  return img;
}

}  // namespace

TEST_CASE("constant image co-occurrence has a single unit entry") {
  const GrayImage img(9, 7, 3);
  for (auto angle : {GlcmAngle::Deg0, GlcmAngle::Deg90}) {
    const auto m = glcm(img, angle, 1, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(m(i, j) == (i == 3 && j == 3 ? 1.0 : 0.0));
  }
}

TEST_CASE("2x2 image with two horizontal pairs") {
  const GrayImage img(2, 2, std::vector<std::uint8_t>{0, 1, 0, 1});
  const auto m = glcm(img, GlcmAngle::Deg0, 1, 2);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 0.5);
  CHECK(m(1, 0) == 0.5);
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("checkerboard at 0 degrees has an empty diagonal") {
  const auto m = glcm(checkerboard(8), GlcmAngle::Deg0, 1, 2);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
  CHECK(m.sum() == doctest::Approx(1.0));
}

TEST_CASE("co-occurrence matches the pair-count oracle on random images") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int w = 3 + static_cast<int>(seed % 7), h = 2 + static_cast<int>(seed % 5);
    const int levels = 2 + static_cast<int>(seed % 7);
    const int d = 1 + static_cast<int>(seed % 2);
    const auto img = oracle::random_image(w, h, levels, seed);
    for (auto angle : {GlcmAngle::Deg0, GlcmAngle::Deg90}) {
      if ((angle == GlcmAngle::Deg0 ? w : h) <= d) continue;
      const auto m = glcm(img, angle, d, levels);
      CHECK(m.p == oracle::naive_glcm(img, angle, d, levels));
    }
  }
}

TEST_CASE("co-occurrence input errors") {
  CHECK_THROWS(glcm(GrayImage(4, 4, 9), GlcmAngle::Deg0, 1, 8));
  CHECK_THROWS(glcm(GrayImage(1, 4, 0), GlcmAngle::Deg0, 1, 8));
  CHECK_THROWS(glcm(GrayImage(4, 1, 0), GlcmAngle::Deg90, 1, 8));
}

TEST_CASE("measures of a unit diagonal entry") {
  std::vector<double> p(16, 0.0);
  p[2 * 4 + 2] = 1.0;
  const auto m = glcm_measures(matrix(4, p));
  CHECK(m.asm_ == doctest::Approx(1.0));
  CHECK(m.energy == doctest::Approx(1.0));
  CHECK(m.contrast == doctest::Approx(0.0));
  CHECK(m.dissimilarity == doctest::Approx(0.0));
  CHECK(m.homogeneity == doctest::Approx(1.0));
  CHECK(m.correlation == doctest::Approx(1.0));
}

TEST_CASE("measures of the off-diagonal two-level matrix") {
  const auto m = glcm_measures(matrix(2, {0.0, 0.5, 0.5, 0.0}));
  CHECK(m.contrast == doctest::Approx(1.0));
  CHECK(m.dissimilarity == doctest::Approx(1.0));
  CHECK(m.homogeneity == doctest::Approx(0.5));
  CHECK(m.asm_ == doctest::Approx(0.5));
  CHECK(m.energy == doctest::Approx(std::sqrt(0.5)));
  CHECK(m.correlation == doctest::Approx(-1.0));
}

TEST_CASE("measures are invariant under transpose") {
  for (std::uint64_t seed = 1; seed < 20; ++seed) {
    const auto img = oracle::random_image(6, 6, 5, seed);
    // An asymmetric matrix built by hand from a one-directional count.
    std::vector<double> p(25, 0.0);
    double total = 0.0;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c + 1 < 6; ++c) {
        p[img.at(r, c) * 5 + img.at(r, c + 1)] += 1.0;
        total += 1.0;
      }
    for (auto& v : p) v /= total;
    std::vector<double> t(25);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) t[j * 5 + i] = p[i * 5 + j];
    const auto a = glcm_measures(matrix(5, p)).as_array();
    const auto b = glcm_measures(matrix(5, t)).as_array();
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]));
  }
}

TEST_CASE("uniform pattern bins") {
  CHECK(uniform_lbp_bin(0, 8) == 0);
  CHECK(uniform_lbp_bin(0xFF, 8) == 8);
  CHECK(uniform_lbp_bin(0b00011100, 8) == 3);
  CHECK(uniform_lbp_bin(0b10000001, 8) == 2);  // wraps around
  CHECK(uniform_lbp_bin(0b01010000, 8) == 9);
  CHECK(uniform_lbp_bin((1u << 24) - 1, 24) == 24);
}

TEST_CASE("LBP histogram shape and normalization") {
  const auto h = lbp_histogram(oracle::random_image(32, 32, 256, 3), 24, 3);
  CHECK(h.size() == 26);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : h) CHECK(v >= 0.0);
}

TEST_CASE("constant image puts all LBP mass in bin P") {
  const auto h = lbp_histogram(GrayImage(20, 20, 128), 24, 3);
  CHECK(h[24] == 1.0);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 1.0);
}

TEST_CASE("LBP at P=8, R=1 sees a bright center as the all-zero pattern") {
  GrayImage img(3, 3, 10);
  img.at(1, 1) = 200;
  const auto h = lbp_histogram(img, 8, 1);
  CHECK(h[0] == 1.0);
}

TEST_CASE("LBP rejects images without an interior") {
  CHECK_THROWS(lbp_histogram(GrayImage(6, 6, 0), 24, 3));
}

TEST_CASE("descriptor names and length") {
  const auto names = descriptor_names();
  REQUIRE(names.size() == 38);
  CHECK(names[0] == "glcm_a0_asm");
  CHECK(names[5] == "glcm_a0_homogeneity");
  CHECK(names[6] == "glcm_a90_asm");
  CHECK(names[12] == "lbp_0");
  CHECK(names[37] == "lbp_25");
  CHECK(extract(oracle::random_image(40, 40, 256, 1)).size() == 38);
}

TEST_CASE("constant image descriptor repeats the GLCM block") {
  const auto v = extract(GrayImage(32, 32, 77));
  for (int k = 0; k < 6; ++k) CHECK(v[k] == v[6 + k]);
}

TEST_CASE("descriptor is pure and the batch matches the serial loop") {
  std::vector<GrayImage> images;
  for (std::uint64_t s = 0; s < 12; ++s) images.push_back(oracle::random_image(24, 24, 256, s));
  CHECK(extract(images[0]) == extract(images[0]));
  const auto serial_rows = serial::extract_batch(images);
  CHECK(extract_batch(images, {}, 1) == serial_rows);
  CHECK(extract_batch(images, {}, 3) == serial_rows);
}

TEST_CASE("quantization maps the byte range onto equal bins") {
  GrayImage img(4, 1, std::vector<std::uint8_t>{0, 31, 32, 255});
  const auto q = quantize(img, 8);
  CHECK(q.at(0, 0) == 0);
  CHECK(q.at(0, 1) == 0);
  CHECK(q.at(0, 2) == 1);
  CHECK(q.at(0, 3) == 7);
}
