#pragma once

// Synthetic labeled tables for pipeline-level tests.

#include <random>
#include <string>
#include <vector>

#include "hpfs/dataset.hpp"
#include "hpfs/random.hpp"

namespace fixture {

// Three Gaussian classes whose means differ on the first `informative`
// columns by `separation` standard deviations; the remaining columns are pure
// N(0, 1) noise.
inline hpfs::Dataset gaussian_classes(int per_class, int informative, int noise,
                                      double separation, std::uint64_t seed) {
  hpfs::Rng rng = hpfs::make_rng({seed, 0x67617573ULL});
  std::normal_distribution<double> n01(0.0, 1.0);
  // Class means: each informative column separates one pair of classes.
  std::vector<std::vector<double>> means(hpfs::kNumClasses, std::vector<double>(informative, 0.0));
  for (int j = 0; j < informative; ++j) {
    const int hi = j % hpfs::kNumClasses;
    means[hi][j] = separation;
  }
  std::vector<hpfs::Sample> samples;
  for (int c = 0; c < hpfs::kNumClasses; ++c) {
    for (int i = 0; i < per_class; ++i) {
      hpfs::Sample s;
      s.label = hpfs::label_from_index(c);
      for (int j = 0; j < informative; ++j) s.features.push_back(means[c][j] + n01(rng));
      for (int j = 0; j < noise; ++j) s.features.push_back(n01(rng));
      samples.push_back(std::move(s));
    }
  }
  std::vector<std::string> names;
  for (int j = 0; j < informative; ++j) names.push_back("info_" + std::to_string(j));
  for (int j = 0; j < noise; ++j) names.push_back("noise_" + std::to_string(j));
  return hpfs::Dataset(std::move(samples), std::move(names));
}

}  // namespace fixture
