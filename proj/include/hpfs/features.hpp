#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpfs/image.hpp"

namespace hpfs {

enum class GlcmAngle { Deg0, Deg90 };

int angle_degrees(GlcmAngle a);

// Normalized gray-level co-occurrence matrix, row-major levels x levels.
struct CooccurrenceMatrix {
  int levels = 0;
  std::vector<double> p;

  double operator()(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
  double sum() const;
};

struct GlcmMeasures {
  double asm_ = 0.0;  // angular second moment
  double energy = 0.0;
  double contrast = 0.0;
  double correlation = 0.0;
  double dissimilarity = 0.0;
  double homogeneity = 0.0;

  std::array<double, 6> as_array() const {
    return {asm_, energy, contrast, correlation, dissimilarity, homogeneity};
  }
};

struct DescriptorConfig {
  std::vector<GlcmAngle> glcm_angles{GlcmAngle::Deg0, GlcmAngle::Deg90};
  int glcm_distance = 1;
  int quantization_levels = 8;
  int lbp_neighbors = 24;
  int lbp_radius = 3;
};

// Maps 0..255 onto 0..levels-1 by equal-width bins.
GrayImage quantize(const GrayImage& image, int levels);

// Pixels must already be quantized below `levels`. Offsets: 0 deg pairs
// (r, c) with (r, c + d); 90 deg pairs (r, c) with (r - d, c). Each pair is
// counted in both directions, then the matrix is normalized to sum 1.
CooccurrenceMatrix glcm(const GrayImage& image, GlcmAngle angle, int distance, int levels);

// A zero-variance matrix reports correlation 1.
GlcmMeasures glcm_measures(const CooccurrenceMatrix& m);

// Bin of a P-bit circular pattern under the uniform mapping: patterns with at
// most two 0/1 transitions go to bin popcount (0..P), all others to bin P+1.
int uniform_lbp_bin(std::uint64_t pattern, int neighbors);

// Uniform LBP histogram with P+2 bins, normalized to sum 1. Neighbors are
// sampled on a circle of radius R with bilinear interpolation; a bit is set
// when the neighbor is >= the center. Pixels closer than R to the border are
// skipped.
std::vector<double> lbp_histogram(const GrayImage& image, int neighbors, int radius);

std::vector<std::string> descriptor_names(const DescriptorConfig& config = {});

// [6 GLCM measures per angle in config order, P+2 LBP bins].
std::vector<double> extract(const GrayImage& image, const DescriptorConfig& config = {});

// Descriptor rows for a batch of images, computed in parallel. Row order
// follows `images` regardless of thread count.
std::vector<std::vector<double>> extract_batch(std::span<const GrayImage> images,
                                               const DescriptorConfig& config = {},
                                               int threads = 0);

}  // namespace hpfs
