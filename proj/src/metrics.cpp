#include "hpfs/metrics.hpp"

#include <stdexcept>
#include <string>

namespace hpfs {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

std::size_t ConfusionMatrix::row_total(int true_class) const {
  std::size_t t = 0;
  for (auto c : counts.at(true_class)) t += c;
  return t;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion: label sequences differ in length");
  if (truth.empty()) throw std::invalid_argument("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses)
      throw std::invalid_argument("confusion: class index out of range");
    ++cm.counts[t][p];
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion: label sequences differ in length");
  if (truth.empty()) throw std::invalid_argument("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++cm.counts[class_index(truth[i])][class_index(predicted[i])];
  return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto n = cm.row_total(c);
    if (n == 0)
      throw std::invalid_argument("balanced_accuracy: class " +
                                  std::string(to_string(label_from_index(c))) +
                                  " is absent from the evaluated labels");
    sum += static_cast<double>(cm.counts[c][c]) / static_cast<double>(n);
  }
  return sum / kNumClasses;
}

}  // namespace hpfs
