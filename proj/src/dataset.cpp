#include "hpfs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hpfs/random.hpp"

namespace hpfs {

ClassLabel label_from_index(int index) {
  if (index < 0 || index >= kNumClasses)
    throw std::out_of_range("class index out of range: " + std::to_string(index));
  return static_cast<ClassLabel>(index);
}

std::string_view to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::A: return "A";
    case ClassLabel::B: return "B";
    case ClassLabel::C: return "C";
  }
  return "?";
}

ClassLabel parse_label(std::string_view token) {
  if (token == "A") return ClassLabel::A;
  if (token == "B") return ClassLabel::B;
  if (token == "C") return ClassLabel::C;
  throw std::runtime_error("unknown label token '" + std::string(token) + "'");
}

Dataset::Dataset(std::vector<Sample> samples, std::vector<std::string> feature_names)
    : samples_(std::move(samples)), feature_names_(std::move(feature_names)) {
  if (samples_.empty()) throw std::invalid_argument("dataset is empty");
  const std::size_t m = feature_names_.size();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& f = samples_[i].features;
    if (f.size() != m)
      throw std::invalid_argument("sample " + std::to_string(i) + " has dimension " +
                                  std::to_string(f.size()) + ", expected " + std::to_string(m));
    for (double v : f)
      if (!std::isfinite(v))
        throw std::invalid_argument("sample " + std::to_string(i) + " has a non-finite feature");
  }
}

ClassCounts Dataset::class_counts() const {
  ClassCounts counts{};
  for (const auto& s : samples_) ++counts[class_index(s.label)];
  return counts;
}

std::vector<ClassLabel> Dataset::labels() const {
  std::vector<ClassLabel> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.label);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Sample> picked;
  picked.reserve(rows.size());
  for (auto r : rows) picked.push_back(samples_.at(r));
  return Dataset(std::move(picked), feature_names_);
}

void require_class_counts(const ClassCounts& counts, std::size_t min_count,
                          std::string_view context) {
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] < min_count) {
      throw std::invalid_argument(std::string(context) + ": class " +
                                  std::string(to_string(label_from_index(c))) + " has " +
                                  std::to_string(counts[c]) + " samples, fewer than " +
                                  std::to_string(min_count));
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset read_feature_table(std::istream& in, std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(where + ": missing header row");

  auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header.back()) != "label")
    throw std::runtime_error(where + ": header must end with a 'label' column");
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < header.size(); ++i) {
    auto n = trim(header[i]);
    if (n.empty()) throw std::runtime_error(where + ": empty feature name in header");
    names.emplace_back(n);
  }
  const std::size_t m = names.size();

  std::vector<Sample> samples;
  std::size_t row = 0;  // 1-based data row number, header excluded
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_commas(trim(line));
    const std::string at = where + ": row " + std::to_string(row);
    if (cells.size() != m + 1)
      throw std::runtime_error(at + ": expected " + std::to_string(m + 1) + " columns, found " +
                               std::to_string(cells.size()));
    Sample s;
    s.features.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      auto tok = trim(cells[j]);
      if (tok.empty()) throw std::runtime_error(at + ": missing value in column '" + names[j] + "'");
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw std::runtime_error(at + ": malformed number '" + std::string(tok) + "' in column '" +
                                 names[j] + "'");
      if (!std::isfinite(v))
        throw std::runtime_error(at + ": non-finite value in column '" + names[j] + "'");
      s.features[j] = v;
    }
    try {
      s.label = parse_label(trim(cells[m]));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(at + ": " + e.what());
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw std::runtime_error(where + ": no data rows");

  Dataset ds(std::move(samples), std::move(names));
  require_class_counts(ds.class_counts(), 2, where);
  return ds;
}

Dataset load_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature table " + path.string());
  return read_feature_table(in, path.string());
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void write_feature_table(const Dataset& dataset, std::ostream& out) {
  for (const auto& n : dataset.feature_names()) out << n << ',';
  out << "label\n";
  for (const auto& s : dataset.samples()) {
    for (double v : s.features) out << format_real(v) << ',';
    out << to_string(s.label) << '\n';
  }
}

void save_feature_table(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write feature table " + path.string());
  write_feature_table(dataset, out);
  if (!out) throw std::runtime_error("failed writing feature table " + path.string());
}

// ---------------------------------------------------------------------------
// Folding

std::vector<std::size_t> FoldPlan::test_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) rows.push_back(i);
  return rows;
}

namespace {

std::array<std::vector<std::size_t>, kNumClasses> rows_by_class(
    std::span<const ClassLabel> labels) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[class_index(labels[i])].push_back(i);
  return by_class;
}

}  // namespace

FoldPlan stratified_k_fold(std::span<const ClassLabel> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_k_fold: k must be at least 2");
  auto by_class = rows_by_class(labels);
  ClassCounts counts{};
  for (int c = 0; c < kNumClasses; ++c) counts[c] = by_class[c].size();
  require_class_counts(counts, static_cast<std::size_t>(k), "stratified_k_fold");

  Rng rng(derive_seed({seed, 0x666f6c64ULL}));
  FoldPlan plan{k, std::vector<int>(labels.size(), -1)};
  std::size_t deal = 0;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (auto r : rows) plan.assignments[r] = static_cast<int>(deal++ % k);
  }
  return plan;
}

FoldPlan stratified_k_fold(const Dataset& dataset, int k, std::uint64_t seed) {
  auto labels = dataset.labels();
  return stratified_k_fold(labels, k, seed);
}

HoldoutRows stratified_holdout(std::span<const ClassLabel> labels, std::uint64_t seed,
                               double validation_fraction) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  auto by_class = rows_by_class(labels);
  Rng rng(derive_seed({seed, 0x686f6c64ULL}));
  HoldoutRows out;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 2)
      throw std::invalid_argument("inner split: class " +
                                  std::string(to_string(label_from_index(c))) +
                                  " has a single sample and cannot be stratified");
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_val = static_cast<std::size_t>(std::lround(validation_fraction * rows.size()));
    n_val = std::clamp<std::size_t>(n_val, 1, rows.size() - 1);
    out.validation.insert(out.validation.end(), rows.begin(), rows.begin() + n_val);
    out.train.insert(out.train.end(), rows.begin() + n_val, rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

InnerSplit inner_split(const Dataset& train_portion, std::uint64_t seed) {
  auto labels = train_portion.labels();
  auto rows = stratified_holdout(labels, seed);
  return {train_portion.subset(rows.train), train_portion.subset(rows.validation)};
}

}  // namespace hpfs
