#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpfs/dataset.hpp"
#include "hpfs/mlp.hpp"
#include "hpfs/pca.hpp"
#include "hpfs/pso.hpp"

namespace hpfs {

enum class MethodId { M1, M2, M3, M4, M5, RS, HP_FS_PSO };

std::string_view to_string(MethodId m);
MethodId parse_method(std::string_view name);
const std::vector<MethodId>& all_methods();
bool uses_pca(MethodId m);
bool uses_swarm(MethodId m);  // M2, M3, M5, HP_FS_PSO

struct CandidateSolution {
  int hidden_units = 20;
  double learning_rate = 0.3;
  double momentum = 0.2;
  std::vector<bool> feature_mask;

  int selected_count() const;
  bool operator==(const CandidateSolution&) const = default;
};

// Which slices of the joint (gamma, eta, mu, mask) vector a search covers.
enum class SearchVariant {
  Full,              // 3 hyperparameters + one bit per feature
  Hyperparameters,   // 3 hyperparameters, all features
  Features,          // one bit per feature, default hyperparameters
};

SearchVariant search_variant(MethodId m);

inline constexpr int kDefaultFeatureDim = 38;
inline constexpr double kMinLearningRate = 0.001;
inline constexpr double kMaxMomentum = 0.999;

// Layout: [gamma (integer, [2, 60]), eta ([0, 1]), mu ([0, 1]), mask bits].
SearchSpace build_search_space(int feature_dim = kDefaultFeatureDim,
                               SearchVariant variant = SearchVariant::Full,
                               double binary_vmax = kBinaryVmax);

// Weka's "a" rule: (attributes + classes) / 2, floor division, held to [2, 60].
int weka_hidden_units(int attributes, int classes = kNumClasses);

struct HyperparameterDefaults {
  double learning_rate = 0.3;
  double momentum = 0.2;
};

// gamma rounds to nearest and clamps to [2, 60]; eta is floored at 0.001 and
// mu capped at 0.999 so training stays well defined. Slices absent from the
// variant take the defaults (gamma by the Weka rule on the selected width).
CandidateSolution decode(std::span<const double> position, SearchVariant variant, int feature_dim,
                         const HyperparameterDefaults& defaults = {});
std::vector<double> encode(const CandidateSolution& c, SearchVariant variant);

// Everything the harness needs beyond the data.
struct ExperimentSettings {
  int runs = 10;
  int folds = 10;
  PsoConfig pso{};  // seed and threads are set per cell
  int epochs = 500;
  HyperparameterDefaults defaults{};
  double pca_variance = kDefaultPcaVariance;
  double binary_vmax = kBinaryVmax;
  int workers = 1;  // concurrent (run, fold) cells
  std::uint64_t seed = 1;

  static ExperimentSettings full_profile();
  static ExperimentSettings desk_profile();
  void validate() const;
};

// How candidate inputs are prepared from a (fit, apply) pair of datasets.
struct Preprocessing {
  bool pca = false;
  double pca_variance = kDefaultPcaVariance;
  // Hidden units follow the Weka rule on the network's actual input width
  // instead of the candidate's value.
  bool weka_hidden_units = false;
};

Preprocessing preprocessing_for(MethodId m, const ExperimentSettings& settings);

struct EvaluationOutcome {
  double bac = 0.0;
  int hidden_units = 0;     // as trained
  int input_width = 0;      // after masking / projection
  bool failed = false;      // empty mask or diverged training
};

// Trains on `fit_set` with the candidate and scores BAC on `score_set`.
// Standardization (and PCA) statistics come from `fit_set` only.
EvaluationOutcome evaluate_candidate(const CandidateSolution& candidate, const Dataset& fit_set,
                                     const Dataset& score_set, const Preprocessing& prep,
                                     int epochs, std::uint64_t seed);

// Fitness of one candidate on one outer-training portion: 1 - validation BAC
// after an inner stratified holdout. Degenerate candidates score 1.0.
// Construction does the inner split and preprocessing once, so repeated
// calls (one per particle) only train and score.
class CandidateEvaluator {
 public:
  CandidateEvaluator(const Dataset& outer_train, const Preprocessing& prep, int epochs,
                     std::uint64_t seed);

  double fitness(const CandidateSolution& candidate) const;
  EvaluationOutcome validate(const CandidateSolution& candidate) const;
  int feature_dim() const { return feature_dim_; }
  int input_width() const { return static_cast<int>(train_.x.cols()); }

 private:
  Preprocessing prep_;
  int epochs_;
  std::uint64_t seed_;
  int feature_dim_;
  LabeledMatrix train_;
  LabeledMatrix validation_;
};

double fitness(const CandidateSolution& candidate, const Dataset& outer_train, std::uint64_t seed,
               const Preprocessing& prep = {}, int epochs = 500);

// Test-fold isolation instrumentation. Every time a cell materializes rows of
// the full dataset it reports them with the phase that will consume them.
enum class DataPhase { Search, FinalTraining, Scoring };

std::string_view to_string(DataPhase p);

struct DataAccess {
  MethodId method;
  int run;
  int fold;
  DataPhase phase;
  std::vector<std::size_t> rows;
};

class AccessObserver {
 public:
  virtual ~AccessObserver() = default;
  // May be called concurrently from several cells.
  virtual void on_access(const DataAccess& access) = 0;
};

struct CellResult {
  int run = 0;
  int fold = 0;
  double validation_bac = 0.0;
  double test_bac = 0.0;
  CandidateSolution candidate;
  std::optional<int> pca_components;  // final model, PCA methods only
  long long evaluations = 0;
  ConvergenceTrace trace;             // empty for M1 / M4
  bool final_training_failed = false;
};

struct ExperimentResult {
  MethodId method = MethodId::M1;
  std::vector<CellResult> cells;  // ordered by (run, fold)
};

// Seeds shared by every method for the same (run, fold), so methods are
// compared on identical folds and inner splits.
std::uint64_t fold_plan_seed(std::uint64_t master, int run);
std::uint64_t inner_seed(std::uint64_t master, int run, int fold);
std::uint64_t search_seed(std::uint64_t master, MethodId method, int run, int fold);

// One (run, fold) cell: search on the outer-training portion, retrain the
// winner on all of it, score the held-out fold.
CellResult run_cell(MethodId method, const Dataset& dataset, const FoldPlan& plan, int run,
                    int fold, const ExperimentSettings& settings,
                    AccessObserver* observer = nullptr);

// Optional per-cell callbacks, invoked from worker threads.
struct CellHooks {
  // Returns a finished cell to reuse instead of recomputing it.
  std::function<std::optional<CellResult>(int run, int fold)> lookup;
  std::function<void(const CellResult&)> on_complete;
};

// Runs every (run, fold) cell, `settings.workers` at a time. Fold plans and
// seeds depend only on settings.seed, so results are identical for any
// worker count.
ExperimentResult run_method(MethodId method, const Dataset& dataset,
                            const ExperimentSettings& settings,
                            AccessObserver* observer = nullptr,
                            const CellHooks* hooks = nullptr);

}  // namespace hpfs
