#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "hpfs/dataset.hpp"

namespace hpfs {

// counts[true][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t row_total(int true_class) const;
};

ConfusionMatrix confusion(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted);
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

// Mean per-class recall. Every true class must be present.
double balanced_accuracy(const ConfusionMatrix& cm);

}  // namespace hpfs
