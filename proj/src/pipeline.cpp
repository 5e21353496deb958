#include "hpfs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include <omp.h>

#include "hpfs/metrics.hpp"
#include "hpfs/random.hpp"

namespace hpfs {

// ---------------------------------------------------------------------------
// Method identifiers

std::string_view to_string(MethodId m) {
  switch (m) {
    case MethodId::M1: return "M1";
    case MethodId::M2: return "M2";
    case MethodId::M3: return "M3";
    case MethodId::M4: return "M4";
    case MethodId::M5: return "M5";
    case MethodId::RS: return "RS";
    case MethodId::HP_FS_PSO: return "HP_FS_PSO";
  }
  return "?";
}

MethodId parse_method(std::string_view name) {
  for (auto m : all_methods())
    if (to_string(m) == name) return m;
  if (name == "HP-FS-PSO") return MethodId::HP_FS_PSO;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> methods{MethodId::M1, MethodId::M2, MethodId::M3,
                                             MethodId::M4, MethodId::M5, MethodId::RS,
                                             MethodId::HP_FS_PSO};
  return methods;
}

bool uses_pca(MethodId m) { return m == MethodId::M4 || m == MethodId::M5; }

bool uses_swarm(MethodId m) {
  return m == MethodId::M2 || m == MethodId::M3 || m == MethodId::M5 || m == MethodId::HP_FS_PSO;
}

SearchVariant search_variant(MethodId m) {
  switch (m) {
    case MethodId::M2:
    case MethodId::M5: return SearchVariant::Hyperparameters;
    case MethodId::M3: return SearchVariant::Features;
    default: return SearchVariant::Full;
  }
}

// ---------------------------------------------------------------------------
// Candidates

int CandidateSolution::selected_count() const {
  return static_cast<int>(std::count(feature_mask.begin(), feature_mask.end(), true));
}

SearchSpace build_search_space(int feature_dim, SearchVariant variant, double binary_vmax) {
  if (feature_dim < 1) throw std::invalid_argument("feature dimension must be positive");
  SearchSpace space;
  if (variant != SearchVariant::Features) {
    space.dims.push_back(DimensionSpec::integer(kMinHiddenUnits, kMaxHiddenUnits));
    space.dims.push_back(DimensionSpec::continuous(0.0, 1.0));
    space.dims.push_back(DimensionSpec::continuous(0.0, 1.0));
  }
  if (variant != SearchVariant::Hyperparameters)
    for (int j = 0; j < feature_dim; ++j) space.dims.push_back(DimensionSpec::binary(binary_vmax));
  return space;
}

int weka_hidden_units(int attributes, int classes) {
  return std::clamp((attributes + classes) / 2, kMinHiddenUnits, kMaxHiddenUnits);
}

CandidateSolution decode(std::span<const double> position, SearchVariant variant, int feature_dim,
                         const HyperparameterDefaults& defaults) {
  const std::size_t hp = variant == SearchVariant::Features ? 0 : 3;
  const std::size_t bits = variant == SearchVariant::Hyperparameters ? 0 : feature_dim;
  if (position.size() != hp + bits) throw std::invalid_argument("decode: position has wrong length");

  CandidateSolution c;
  if (bits == 0) {
    c.feature_mask.assign(feature_dim, true);
  } else {
    c.feature_mask.resize(feature_dim);
    for (int j = 0; j < feature_dim; ++j) c.feature_mask[j] = position[hp + j] >= 0.5;
  }
  if (hp == 0) {
    c.hidden_units = weka_hidden_units(c.selected_count());
    c.learning_rate = defaults.learning_rate;
    c.momentum = defaults.momentum;
  } else {
    c.hidden_units = std::clamp(static_cast<int>(std::lround(position[0])), kMinHiddenUnits,
                                kMaxHiddenUnits);
    c.learning_rate = std::clamp(position[1], kMinLearningRate, 1.0);
    c.momentum = std::clamp(position[2], 0.0, kMaxMomentum);
  }
  return c;
}

std::vector<double> encode(const CandidateSolution& c, SearchVariant variant) {
  std::vector<double> x;
  if (variant != SearchVariant::Features) {
    x.push_back(c.hidden_units);
    x.push_back(c.learning_rate);
    x.push_back(c.momentum);
  }
  if (variant != SearchVariant::Hyperparameters)
    for (bool b : c.feature_mask) x.push_back(b ? 1.0 : 0.0);
  return x;
}

// ---------------------------------------------------------------------------
// Settings

ExperimentSettings ExperimentSettings::full_profile() { return ExperimentSettings{}; }

ExperimentSettings ExperimentSettings::desk_profile() {
  ExperimentSettings s;
  s.runs = 3;
  s.folds = 5;
  s.pso.n_particles = 10;
  s.pso.max_iterations = 50;
  return s;
}

void ExperimentSettings::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be positive");
  if (folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  if (!(pca_variance > 0.0 && pca_variance <= 1.0))
    throw std::invalid_argument("PCA variance threshold must lie in (0, 1]");
  if (!(binary_vmax > 0.0)) throw std::invalid_argument("binary vmax must be positive");
  pso.validate();
}

Preprocessing preprocessing_for(MethodId m, const ExperimentSettings& settings) {
  Preprocessing p;
  p.pca = uses_pca(m);
  p.pca_variance = settings.pca_variance;
  p.weka_hidden_units = m == MethodId::M1 || m == MethodId::M3 || m == MethodId::M4;
  return p;
}

// ---------------------------------------------------------------------------
// Training and scoring one candidate

namespace {

std::uint64_t network_seed(std::uint64_t seed) { return derive_seed({seed, 0x6d6c70ULL}); }

std::vector<Eigen::Index> mask_columns(const std::vector<bool>& mask) {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) cols.push_back(static_cast<Eigen::Index>(j));
  return cols;
}

// Inputs prepared from a fit matrix: either z-scored columns or a PCA basis.
struct InputTransform {
  bool pca = false;
  Standardizer standardizer;
  PcaProjection projection;

  static InputTransform fit(const Eigen::MatrixXd& x, const Preprocessing& prep) {
    InputTransform t;
    t.pca = prep.pca;
    if (prep.pca) {
      t.projection = fit_pca(x, prep.pca_variance, PcaScaling::Standardize);
    } else {
      t.standardizer = Standardizer::fit(x);
    }
    return t;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return pca ? projection.project(x) : standardizer.apply(x);
  }
};

struct FittedModel {
  std::vector<Eigen::Index> columns;
  InputTransform transform;
  NetworkParams params;
  int hidden_units = 0;
  bool failed = false;
};

int resolve_hidden_units(const CandidateSolution& c, const Preprocessing& prep, Eigen::Index width) {
  return prep.weka_hidden_units ? weka_hidden_units(static_cast<int>(width)) : c.hidden_units;
}

TrainConfig train_config(const CandidateSolution& c, int hidden_units, int epochs,
                         std::uint64_t seed) {
  TrainConfig cfg;
  cfg.hidden_units = hidden_units;
  cfg.learning_rate = c.learning_rate;
  cfg.momentum = c.momentum;
  cfg.epochs = epochs;
  cfg.seed = network_seed(seed);
  return cfg;
}

double score_bac(const NetworkParams& params, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const auto predicted = predict_batch(params, x);
  return balanced_accuracy(confusion(y, predicted));
}

FittedModel fit_candidate(const CandidateSolution& c, const Dataset& fit_set,
                          const Preprocessing& prep, int epochs, std::uint64_t seed) {
  FittedModel m;
  const LabeledMatrix raw = to_matrix(fit_set);
  if (prep.pca) {
    m.columns.resize(static_cast<std::size_t>(raw.x.cols()));
    for (Eigen::Index j = 0; j < raw.x.cols(); ++j) m.columns[j] = j;
  } else {
    m.columns = mask_columns(c.feature_mask);
  }
  if (m.columns.empty()) {
    m.failed = true;
    return m;
  }
  const Eigen::MatrixXd selected = raw.x(Eigen::all, m.columns);
  m.transform = InputTransform::fit(selected, prep);
  LabeledMatrix data{m.transform.apply(selected), raw.y};
  m.hidden_units = resolve_hidden_units(c, prep, data.x.cols());
  FitResult r = fit(data, train_config(c, m.hidden_units, epochs, seed));
  m.params = std::move(r.params);
  m.failed = r.diverged_at.has_value();
  return m;
}

double score_model(const FittedModel& m, const Dataset& score_set) {
  const LabeledMatrix raw = to_matrix(score_set);
  if (m.columns.empty()) return 0.0;
  const Eigen::MatrixXd x = m.transform.apply(raw.x(Eigen::all, m.columns));
  return score_bac(m.params, x, raw.y);
}

}  // namespace

EvaluationOutcome evaluate_candidate(const CandidateSolution& candidate, const Dataset& fit_set,
                                     const Dataset& score_set, const Preprocessing& prep,
                                     int epochs, std::uint64_t seed) {
  if (fit_set.dimension() != score_set.dimension())
    throw std::invalid_argument("evaluate_candidate: dataset dimensions differ");
  if (!prep.pca && candidate.feature_mask.size() != fit_set.dimension())
    throw std::invalid_argument("evaluate_candidate: mask length does not match features");
  const FittedModel m = fit_candidate(candidate, fit_set, prep, epochs, seed);
  EvaluationOutcome out;
  out.hidden_units = m.hidden_units;
  out.input_width = m.columns.empty() ? 0
                    : prep.pca        ? m.transform.projection.components()
                                      : static_cast<int>(m.columns.size());
  out.failed = m.failed || m.columns.empty();
  out.bac = m.columns.empty() ? 0.0 : score_model(m, score_set);
  return out;
}

CandidateEvaluator::CandidateEvaluator(const Dataset& outer_train, const Preprocessing& prep,
                                       int epochs, std::uint64_t seed)
    : prep_(prep), epochs_(epochs), seed_(seed), feature_dim_(static_cast<int>(outer_train.dimension())) {
  const auto labels = outer_train.labels();
  const auto rows = stratified_holdout(labels, seed);
  const LabeledMatrix all = to_matrix(outer_train);
  auto take = [&all](const std::vector<std::size_t>& idx) {
    LabeledMatrix m{Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()), all.x.cols()), {}};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m.x.row(static_cast<Eigen::Index>(i)) = all.x.row(static_cast<Eigen::Index>(idx[i]));
      m.y.push_back(all.y[idx[i]]);
    }
    return m;
  };
  train_ = take(rows.train);
  validation_ = take(rows.validation);
  // Column-wise z-scoring commutes with column masking, so one transform of
  // the full-width matrices serves every mask.
  const InputTransform t = InputTransform::fit(train_.x, prep_);
  train_.x = t.apply(train_.x);
  validation_.x = t.apply(validation_.x);
}

EvaluationOutcome CandidateEvaluator::validate(const CandidateSolution& c) const {
  EvaluationOutcome out;
  std::vector<Eigen::Index> cols;
  if (prep_.pca) {
    for (Eigen::Index j = 0; j < train_.x.cols(); ++j) cols.push_back(j);
  } else {
    if (static_cast<int>(c.feature_mask.size()) != feature_dim_)
      throw std::invalid_argument("candidate mask length does not match features");
    cols = mask_columns(c.feature_mask);
  }
  if (cols.empty()) {
    out.failed = true;
    return out;
  }
  LabeledMatrix data{train_.x(Eigen::all, cols), train_.y};
  out.input_width = static_cast<int>(cols.size());
  out.hidden_units = resolve_hidden_units(c, prep_, data.x.cols());
  FitResult r = fit(data, train_config(c, out.hidden_units, epochs_, seed_));
  if (r.diverged_at) {
    out.failed = true;
    return out;
  }
  out.bac = score_bac(r.params, validation_.x(Eigen::all, cols), validation_.y);
  return out;
}

double CandidateEvaluator::fitness(const CandidateSolution& c) const {
  const auto outcome = validate(c);
  return outcome.failed ? 1.0 : 1.0 - outcome.bac;
}

double fitness(const CandidateSolution& candidate, const Dataset& outer_train, std::uint64_t seed,
               const Preprocessing& prep, int epochs) {
  return CandidateEvaluator(outer_train, prep, epochs, seed).fitness(candidate);
}

// ---------------------------------------------------------------------------
// Experiment cells

std::string_view to_string(DataPhase p) {
  switch (p) {
    case DataPhase::Search: return "search";
    case DataPhase::FinalTraining: return "final_training";
    case DataPhase::Scoring: return "scoring";
  }
  return "?";
}

std::uint64_t fold_plan_seed(std::uint64_t master, int run) {
  return derive_seed({master, 0x666f6c6473ULL, static_cast<std::uint64_t>(run)});
}

std::uint64_t inner_seed(std::uint64_t master, int run, int fold) {
  return derive_seed({master, 0x696e6e6572ULL, static_cast<std::uint64_t>(run),
                      static_cast<std::uint64_t>(fold)});
}

std::uint64_t search_seed(std::uint64_t master, MethodId method, int run, int fold) {
  return derive_seed({master, 0x736561726368ULL, static_cast<std::uint64_t>(method),
                      static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(fold)});
}

namespace {

// The only path from the full dataset to the rows a cell works on.
class TrackedRows {
 public:
  TrackedRows(const Dataset& full, AccessObserver* observer, MethodId method, int run, int fold)
      : full_(full), observer_(observer), method_(method), run_(run), fold_(fold) {}

  Dataset take(DataPhase phase, const std::vector<std::size_t>& rows) const {
    if (observer_) observer_->on_access({method_, run_, fold_, phase, rows});
    return full_.subset(rows);
  }

 private:
  const Dataset& full_;
  AccessObserver* observer_;
  MethodId method_;
  int run_, fold_;
};

}  // namespace

CellResult run_cell(MethodId method, const Dataset& dataset, const FoldPlan& plan, int run,
                    int fold, const ExperimentSettings& settings, AccessObserver* observer) {
  const TrackedRows source(dataset, observer, method, run, fold);
  const auto train_rows = plan.train_rows(fold);
  const int feature_dim = static_cast<int>(dataset.dimension());
  const Preprocessing prep = preprocessing_for(method, settings);
  const std::uint64_t cell_seed = inner_seed(settings.seed, run, fold);

  CellResult cell;
  cell.run = run;
  cell.fold = fold;

  {
    const Dataset outer_train = source.take(DataPhase::Search, train_rows);
    const CandidateEvaluator evaluator(outer_train, prep, settings.epochs, cell_seed);
    const SearchVariant variant = search_variant(method);
    const SearchSpace space = build_search_space(feature_dim, variant, settings.binary_vmax);
    const FitnessFn fitness_fn = [&](std::span<const double> x) {
      return evaluator.fitness(decode(x, variant, feature_dim, settings.defaults));
    };
    PsoConfig pso = settings.pso;
    pso.seed = search_seed(settings.seed, method, run, fold);
    pso.threads = 1;

    if (method == MethodId::M1 || method == MethodId::M4) {
      cell.candidate.feature_mask.assign(feature_dim, true);
      cell.candidate.hidden_units = weka_hidden_units(feature_dim);
      cell.candidate.learning_rate = settings.defaults.learning_rate;
      cell.candidate.momentum = settings.defaults.momentum;
      const auto outcome = evaluator.validate(cell.candidate);
      cell.validation_bac = outcome.failed ? 0.0 : outcome.bac;
      cell.evaluations = 1;
    } else {
      const OptimizeResult r = method == MethodId::RS ? random_search(fitness_fn, space, pso)
                                                      : optimize(fitness_fn, space, pso);
      cell.candidate = decode(r.best_position, variant, feature_dim, settings.defaults);
      cell.validation_bac = 1.0 - r.best_fitness;
      cell.evaluations = r.evaluations;
      cell.trace = r.trace;
    }
  }

  const Dataset final_train = source.take(DataPhase::FinalTraining, train_rows);
  const FittedModel model =
      fit_candidate(cell.candidate, final_train, prep, settings.epochs, cell_seed);
  cell.final_training_failed = model.failed;
  if (!model.columns.empty()) cell.candidate.hidden_units = model.hidden_units;
  if (prep.pca) cell.pca_components = model.transform.projection.components();

  const Dataset test = source.take(DataPhase::Scoring, plan.test_rows(fold));
  cell.test_bac = score_model(model, test);
  return cell;
}

ExperimentResult run_method(MethodId method, const Dataset& dataset,
                            const ExperimentSettings& settings, AccessObserver* observer,
                            const CellHooks* hooks) {
  settings.validate();
  std::vector<FoldPlan> plans;
  for (int r = 0; r < settings.runs; ++r)
    plans.push_back(stratified_k_fold(dataset, settings.folds, fold_plan_seed(settings.seed, r)));

  ExperimentResult result;
  result.method = method;
  const int n_cells = settings.runs * settings.folds;
  result.cells.resize(n_cells);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(settings.workers)
  for (int i = 0; i < n_cells; ++i) {
    const int run = i / settings.folds, fold = i % settings.folds;
    try {
      std::optional<CellResult> cached;
      if (hooks && hooks->lookup) cached = hooks->lookup(run, fold);
      if (cached) {
        result.cells[i] = std::move(*cached);
      } else {
        result.cells[i] = run_cell(method, dataset, plans[run], run, fold, settings, observer);
        if (hooks && hooks->on_complete) hooks->on_complete(result.cells[i]);
      }
    } catch (...) {
#pragma omp critical(hpfs_cell_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace hpfs
