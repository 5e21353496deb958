#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpfs/image.hpp"

namespace hpfs {

// Board quality grade. The ordering A > B > C is metadata only.
enum class ClassLabel : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr int kNumClasses = 3;

inline int class_index(ClassLabel c) { return static_cast<int>(c); }
ClassLabel label_from_index(int index);
std::string_view to_string(ClassLabel c);
ClassLabel parse_label(std::string_view token);

struct Sample {
  std::vector<double> features;
  ClassLabel label = ClassLabel::A;

  bool operator==(const Sample&) const = default;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

// Immutable labeled feature table. Construction checks that it is non-empty,
// all rows share one dimension equal to the number of feature names, and every
// value is finite.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, std::vector<std::string> feature_names);

  std::size_t size() const { return samples_.size(); }
  std::size_t dimension() const { return feature_names_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  ClassCounts class_counts() const;
  std::vector<ClassLabel> labels() const;

  // Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Sample> samples_;
  std::vector<std::string> feature_names_;
};

// Throws if any class has fewer than `min_count` samples.
void require_class_counts(const ClassCounts& counts, std::size_t min_count,
                          std::string_view context);

// Feature CSV: header `<name_1>,...,<name_m>,label`, one sample per row.
Dataset read_feature_table(std::istream& in, std::string_view source = "<stream>");
Dataset load_feature_table(const std::filesystem::path& path);
void write_feature_table(const Dataset& dataset, std::ostream& out);
void save_feature_table(const Dataset& dataset, const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_real(double value);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold index per sample

  std::vector<std::size_t> test_rows(int fold) const;
  std::vector<std::size_t> train_rows(int fold) const;
};

// Shuffles each class with a seeded generator and deals rows round-robin over
// the folds, continuing the deal position across classes so fold sizes also
// differ by at most one.
FoldPlan stratified_k_fold(std::span<const ClassLabel> labels, int k, std::uint64_t seed);
FoldPlan stratified_k_fold(const Dataset& dataset, int k, std::uint64_t seed);

struct HoldoutRows {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

inline constexpr double kValidationFraction = 0.2;

// Stratified 80/20 holdout; every class contributes at least one row to each
// side. Row indices refer to `labels`.
HoldoutRows stratified_holdout(std::span<const ClassLabel> labels, std::uint64_t seed,
                               double validation_fraction = kValidationFraction);

struct InnerSplit {
  Dataset train;
  Dataset validation;
};

InnerSplit inner_split(const Dataset& train_portion, std::uint64_t seed);

struct SyntheticTextures {
  std::vector<GrayImage> images;
  std::vector<ClassLabel> labels;
};

// Wood-like grain textures: A is clean grain, B carries a few dark knots, C
// carries more knots plus dark cracks. Parameter ranges overlap so the classes
// are not trivially separable.
SyntheticTextures generate_synthetic_textures(int n_per_class, int image_size,
                                              std::uint64_t seed);

}  // namespace hpfs
