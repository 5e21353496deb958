#include "hpfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hpfs {

namespace {

bool nearly_equal(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max({std::abs(x), std::abs(y), 1e-300});
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && nearly_equal(values[order[j]], values[order[i]])) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double w) {
  // Midranks are multiples of 1/2, so doubled ranks are integers and the null
  // distribution of 2*W+ is a subset-sum count over 2^n sign patterns.
  std::vector<long long> doubled(ranks.size());
  long long total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = std::llround(2.0 * ranks[i]);
    total += doubled[i];
  }
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  long long reach = 0;
  for (auto r : doubled) {
    for (long long s = reach; s >= 0; --s)
      if (ways[s] != 0.0) ways[s + r] += ways[s];
    reach += r;
  }
  const long long observed = std::llround(2.0 * w);
  const long long lower = std::min(observed, total - observed);
  double tail = 0.0;
  for (long long s = 0; s <= lower; ++s) tail += ways[s];
  const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, p);
}

double wilcoxon_normal_p(std::span<const double> ranks, double w) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double deviation = std::abs(w - mean);
  const double z = -std::max(0.0, deviation - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_cdf(z));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
    if (std::abs(d) > 1e-12 * scale) diffs.push_back(d);
  }
  if (diffs.empty()) throw DegeneratePairing();
  if (static_cast<int>(diffs.size()) < kWilcoxonMinPairs)
    throw std::invalid_argument("wilcoxon: need at least " + std::to_string(kWilcoxonMinPairs) +
                                " non-zero differences, got " + std::to_string(diffs.size()));

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
  const auto ranks = midranks(magnitudes);

  WilcoxonResult r;
  r.n = static_cast<int>(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);
  r.exact = method == WilcoxonMethod::Exact ||
            (method == WilcoxonMethod::Auto && r.n <= kWilcoxonExactLimit);
  r.p_value = r.exact ? wilcoxon_exact_p(ranks, r.statistic) : wilcoxon_normal_p(ranks, r.statistic);
  r.significant_at_5pct = r.p_value < kSignificanceLevel;
  return r;
}

}  // namespace hpfs
