#include "hpfs/features.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace hpfs {

int angle_degrees(GlcmAngle a) { return a == GlcmAngle::Deg0 ? 0 : 90; }

double CooccurrenceMatrix::sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

GrayImage quantize(const GrayImage& image, int levels) {
  if (levels < 1 || levels > 256) throw std::invalid_argument("quantization levels must be in [1, 256]");
  std::vector<std::uint8_t> px(image.pixels().size());
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(image.pixels()[i] * levels / 256);
  return GrayImage(image.width(), image.height(), std::move(px));
}

CooccurrenceMatrix glcm(const GrayImage& image, GlcmAngle angle, int distance, int levels) {
  if (levels < 1) throw std::invalid_argument("glcm: levels must be positive");
  if (distance < 1) throw std::invalid_argument("glcm: distance must be positive");
  const int dr = angle == GlcmAngle::Deg0 ? 0 : -distance;
  const int dc = angle == GlcmAngle::Deg0 ? distance : 0;
  const int w = image.width(), h = image.height();
  if (w <= std::abs(dc) || h <= std::abs(dr))
    throw std::invalid_argument("glcm: image smaller than the pixel offset");

  CooccurrenceMatrix m{levels, std::vector<double>(static_cast<std::size_t>(levels) * levels, 0.0)};
  std::size_t pairs = 0;
  for (int r = std::max(0, -dr); r < h - std::max(0, dr); ++r) {
    for (int c = 0; c < w - dc; ++c) {
      const int i = image.at(r, c);
      const int j = image.at(r + dr, c + dc);
      if (i >= levels || j >= levels)
        throw std::invalid_argument("glcm: pixel value exceeds quantization levels");
      m.p[static_cast<std::size_t>(i) * levels + j] += 1.0;
      m.p[static_cast<std::size_t>(j) * levels + i] += 1.0;
      ++pairs;
    }
  }
  const double total = 2.0 * static_cast<double>(pairs);
  for (auto& v : m.p) v /= total;
  return m;
}

GlcmMeasures glcm_measures(const CooccurrenceMatrix& m) {
  const int L = m.levels;
  double mu_i = 0.0, mu_j = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      mu_i += i * m(i, j);
      mu_j += j * m(i, j);
    }
  double var_i = 0.0, var_j = 0.0, cov = 0.0;
  GlcmMeasures out;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      const double p = m(i, j);
      const double d = i - j;
      out.asm_ += p * p;
      out.contrast += d * d * p;
      out.dissimilarity += std::abs(d) * p;
      out.homogeneity += p / (1.0 + d * d);
      var_i += (i - mu_i) * (i - mu_i) * p;
      var_j += (j - mu_j) * (j - mu_j) * p;
      cov += (i - mu_i) * (j - mu_j) * p;
    }
  }
  out.energy = std::sqrt(out.asm_);
  const double denom = std::sqrt(var_i * var_j);
  out.correlation = denom < 1e-15 ? 1.0 : cov / denom;
  return out;
}

int uniform_lbp_bin(std::uint64_t pattern, int neighbors) {
  if (neighbors < 1 || neighbors > 64) throw std::invalid_argument("LBP neighbor count must be in [1, 64]");
  const std::uint64_t mask = neighbors == 64 ? ~0ULL : ((1ULL << neighbors) - 1);
  pattern &= mask;
  // circular rotate by one and count differing bits
  const std::uint64_t rotated = ((pattern >> 1) | ((pattern & 1ULL) << (neighbors - 1))) & mask;
  const int transitions = std::popcount(pattern ^ rotated);
  return transitions <= 2 ? std::popcount(pattern) : neighbors + 1;
}

std::vector<double> lbp_histogram(const GrayImage& image, int neighbors, int radius) {
  if (neighbors < 4 || neighbors > 64) throw std::invalid_argument("lbp: neighbors must be in [4, 64]");
  if (radius < 1) throw std::invalid_argument("lbp: radius must be positive");
  const int w = image.width(), h = image.height();
  if (w < 2 * radius + 1 || h < 2 * radius + 1)
    throw std::invalid_argument("lbp: image too small for radius " + std::to_string(radius));

  struct Offset {
    int r0, c0;    // top-left integer corner
    double fr, fc;  // fractional parts in [0, 1)
  };
  std::vector<Offset> offsets(neighbors);
  for (int p = 0; p < neighbors; ++p) {
    const double theta = 2.0 * std::numbers::pi * p / neighbors;
    // round away floating noise so axis-aligned samples land on pixels
    const double rr = std::round(-radius * std::sin(theta) * 1e5) / 1e5;
    const double cc = std::round(radius * std::cos(theta) * 1e5) / 1e5;
    const double r0 = std::floor(rr), c0 = std::floor(cc);
    offsets[p] = {static_cast<int>(r0), static_cast<int>(c0), rr - r0, cc - c0};
  }

  std::vector<double> hist(neighbors + 2, 0.0);
  std::size_t count = 0;
  for (int r = radius; r < h - radius; ++r) {
    for (int c = radius; c < w - radius; ++c) {
      const double center = image.at(r, c);
      std::uint64_t pattern = 0;
      for (int p = 0; p < neighbors; ++p) {
        const auto& o = offsets[p];
        const int r0 = r + o.r0, c0 = c + o.c0;
        const int r1 = o.fr > 0.0 ? r0 + 1 : r0;
        const int c1 = o.fc > 0.0 ? c0 + 1 : c0;
        const double a = image.at(r0, c0), b = image.at(r0, c1);
        const double d = image.at(r1, c0), e = image.at(r1, c1);
        // difference form keeps flat neighborhoods exactly flat
        const double top = a + o.fc * (b - a);
        const double bottom = d + o.fc * (e - d);
        const double value = top + o.fr * (bottom - top);
        if (value >= center) pattern |= (1ULL << p);
      }
      hist[uniform_lbp_bin(pattern, neighbors)] += 1.0;
      ++count;
    }
  }
  for (auto& v : hist) v /= static_cast<double>(count);
  return hist;
}

std::vector<std::string> descriptor_names(const DescriptorConfig& config) {
  static const char* measure_names[] = {"asm", "energy", "contrast",
                                        "correlation", "dissimilarity", "homogeneity"};
  std::vector<std::string> names;
  for (auto a : config.glcm_angles)
    for (const char* m : measure_names)
      names.push_back("glcm_a" + std::to_string(angle_degrees(a)) + "_" + m);
  for (int b = 0; b < config.lbp_neighbors + 2; ++b) names.push_back("lbp_" + std::to_string(b));
  return names;
}

std::vector<double> extract(const GrayImage& image, const DescriptorConfig& config) {
  std::vector<double> out;
  out.reserve(6 * config.glcm_angles.size() + config.lbp_neighbors + 2);
  const GrayImage q = quantize(image, config.quantization_levels);
  for (auto a : config.glcm_angles) {
    const auto measures =
        glcm_measures(glcm(q, a, config.glcm_distance, config.quantization_levels)).as_array();
    out.insert(out.end(), measures.begin(), measures.end());
  }
  const auto hist = lbp_histogram(image, config.lbp_neighbors, config.lbp_radius);
  out.insert(out.end(), hist.begin(), hist.end());
  return out;
}

std::vector<std::vector<double>> extract_batch(std::span<const GrayImage> images,
                                               const DescriptorConfig& config, int threads) {
  std::vector<std::vector<double>> rows(images.size());
  const int n = static_cast<int>(images.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (int i = 0; i < n; ++i) {
    try {
      rows[i] = extract(images[i], config);
    } catch (...) {
#pragma omp critical(hpfs_extract_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace hpfs
