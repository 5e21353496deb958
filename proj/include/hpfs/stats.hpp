#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpfs {

inline constexpr int kWilcoxonExactLimit = 25;
inline constexpr int kWilcoxonMinPairs = 5;
inline constexpr double kSignificanceLevel = 0.05;

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  int n = 0;               // non-zero differences used
  double p_value = 1.0;    // two-sided
  bool exact = false;
  bool significant_at_5pct = false;
};

// Every difference is zero.
class DegeneratePairing : public std::invalid_argument {
 public:
  DegeneratePairing() : std::invalid_argument("degenerate pairing: all differences are zero") {}
};

// Signed ranks of absolute differences; ties get midranks.
std::vector<double> midranks(std::span<const double> values);

// Two-sided Wilcoxon signed-rank test on d = a - b. Zero differences are
// dropped. Auto uses the exact null distribution for n <= 25 and the normal
// approximation with continuity and tie correction above that.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

// Exact two-sided p for an observed W (either tail) given the ranks in use.
double wilcoxon_exact_p(std::span<const double> ranks, double w);
double wilcoxon_normal_p(std::span<const double> ranks, double w);

double normal_cdf(double z);

}  // namespace hpfs
