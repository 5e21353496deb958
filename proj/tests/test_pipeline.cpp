#include <doctest.h>

#include <mutex>
#include <set>

#include "fixtures.hpp"
#include "hpfs/pipeline.hpp"

using namespace hpfs;

namespace {

ExperimentSettings tiny_settings() {
  ExperimentSettings s = ExperimentSettings::desk_profile();
  s.runs = 2;
  s.folds = 3;
  s.pso.n_particles = 4;
  s.pso.max_iterations = 3;
  s.epochs = 60;
  s.seed = 5;
  return s;
}

class RecordingObserver : public AccessObserver {
 public:
  void on_access(const DataAccess& a) override {
    std::lock_guard lock(mutex_);
    log.push_back(a);
  }
  std::vector<DataAccess> log;

 private:
  std::mutex mutex_;
};

CandidateSolution all_features(int dim) {
  CandidateSolution c;
  c.feature_mask.assign(dim, true);
  return c;
}

}  // namespace

TEST_CASE("search space layouts") {
  const auto full = build_search_space();
  REQUIRE(full.size() == 41);
  CHECK(full.dims[0].kind == DimensionKind::Integer);
  CHECK(full.dims[0].lower == 2);
  CHECK(full.dims[0].upper == 60);
  CHECK(full.dims[0].vmax == 60);
  CHECK(full.dims[1].upper == 1);
  CHECK(full.dims[2].upper == 1);
  CHECK(full.dims[3].kind == DimensionKind::Binary);
  CHECK(full.dims[3].vmax == kBinaryVmax);
  CHECK(build_search_space(38, SearchVariant::Features).size() == 38);
  CHECK(build_search_space(38, SearchVariant::Hyperparameters).size() == 3);
}

TEST_CASE("method variants") {
  CHECK(search_variant(MethodId::HP_FS_PSO) == SearchVariant::Full);
  CHECK(search_variant(MethodId::RS) == SearchVariant::Full);
  CHECK(search_variant(MethodId::M2) == SearchVariant::Hyperparameters);
  CHECK(search_variant(MethodId::M5) == SearchVariant::Hyperparameters);
  CHECK(search_variant(MethodId::M3) == SearchVariant::Features);
  CHECK(uses_pca(MethodId::M4));
  CHECK_FALSE(uses_pca(MethodId::M3));
  CHECK(parse_method("HP-FS-PSO") == MethodId::HP_FS_PSO);
  for (auto m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS(parse_method("M9"));
}

TEST_CASE("decoding positions") {
  std::vector<double> x(41, 1.0);
  x[0] = 19.6;
  x[1] = 0.0;
  x[2] = 1.0;
  const auto c = decode(x, SearchVariant::Full, 38);
  CHECK(c.hidden_units == 20);
  CHECK(c.selected_count() == 38);
  CHECK(c.learning_rate == kMinLearningRate);
  CHECK(c.momentum == kMaxMomentum);

  x[0] = 60.4;
  CHECK(decode(x, SearchVariant::Full, 38).hidden_units == 60);
  x[0] = 1.6;
  CHECK(decode(x, SearchVariant::Full, 38).hidden_units == 2);

  std::vector<double> bits(38, 0.0);
  for (int j = 0; j < 10; ++j) bits[j] = 1.0;
  const auto fs = decode(bits, SearchVariant::Features, 38);
  CHECK(fs.selected_count() == 10);
  CHECK(fs.hidden_units == weka_hidden_units(10));
  CHECK(fs.learning_rate == 0.3);
  CHECK(fs.momentum == 0.2);

  const std::vector<double> hp{33.2, 0.5, 0.4};
  const auto h = decode(hp, SearchVariant::Hyperparameters, 38);
  CHECK(h.selected_count() == 38);
  CHECK(h.hidden_units == 33);

  CHECK_THROWS(decode(hp, SearchVariant::Full, 38));
}

TEST_CASE("encode and decode agree on valid candidates") {
  CandidateSolution c = all_features(38);
  c.hidden_units = 17;
  c.learning_rate = 0.25;
  c.momentum = 0.5;
  c.feature_mask[3] = false;
  CHECK(decode(encode(c, SearchVariant::Full), SearchVariant::Full, 38) == c);
  CHECK(build_search_space().contains(encode(c, SearchVariant::Full)));
}

TEST_CASE("Weka hidden-unit rule") {
  CHECK(weka_hidden_units(38) == 20);
  CHECK(weka_hidden_units(10) == 6);
  CHECK(weka_hidden_units(0) == 2);
  CHECK(weka_hidden_units(200) == 60);
}

TEST_CASE("empty mask scores the sentinel fitness") {
  const Dataset ds = fixture::gaussian_classes(20, 4, 2, 3.0, 1);
  CandidateSolution c = all_features(6);
  c.feature_mask.assign(6, false);
  CHECK(fitness(c, ds, 3, {}, 50) == 1.0);
}

TEST_CASE("perfectly separable data has zero fitness") {
  const Dataset ds = fixture::gaussian_classes(20, 6, 0, 12.0, 2);
  CHECK(fitness(all_features(6), ds, 3, {}, 300) == 0.0);
}

TEST_CASE("sensible candidate on separable data has low fitness") {
  const Dataset ds = fixture::gaussian_classes(30, 8, 4, 2.5, 3);
  CHECK(fitness(all_features(12), ds, 7) < 0.3);
}

TEST_CASE("fitness depends only on the candidate and seed") {
  const Dataset ds = fixture::gaussian_classes(20, 4, 4, 1.5, 4);
  const CandidateEvaluator ev(ds, {}, 80, 9);
  CandidateSolution c = all_features(8);
  c.feature_mask[6] = false;
  CHECK(ev.fitness(c) == ev.fitness(c));
  CHECK(ev.fitness(c) == fitness(c, ds, 9, {}, 80));
}

TEST_CASE("evaluator matches direct training on the inner split") {
  const Dataset ds = fixture::gaussian_classes(20, 3, 3, 2.0, 5);
  const auto split = inner_split(ds, 11);
  CandidateSolution c = all_features(6);
  c.feature_mask[0] = false;
  c.hidden_units = 7;
  const auto direct = evaluate_candidate(c, split.train, split.validation, {}, 70, 11);
  const auto cached = CandidateEvaluator(ds, {}, 70, 11).validate(c);
  CHECK(direct.bac == doctest::Approx(cached.bac).epsilon(1e-12));
  CHECK(direct.hidden_units == 7);
  CHECK(direct.input_width == 5);
}

TEST_CASE("PCA preprocessing and the Weka rule on the reduced width") {
  const Dataset ds = fixture::gaussian_classes(20, 3, 5, 2.0, 6);
  Preprocessing prep;
  prep.pca = true;
  prep.weka_hidden_units = true;
  const auto split = inner_split(ds, 1);
  const auto out = evaluate_candidate(all_features(8), split.train, split.validation, prep, 40, 1);
  CHECK(out.input_width >= 1);
  CHECK(out.input_width <= 8);
  CHECK(out.hidden_units == weka_hidden_units(out.input_width));
}

TEST_CASE("preprocessing per method") {
  const auto s = ExperimentSettings::desk_profile();
  CHECK(preprocessing_for(MethodId::M1, s).weka_hidden_units);
  CHECK(preprocessing_for(MethodId::M4, s).pca);
  CHECK_FALSE(preprocessing_for(MethodId::M5, s).weka_hidden_units);
  CHECK_FALSE(preprocessing_for(MethodId::HP_FS_PSO, s).pca);
}

TEST_CASE("profiles") {
  const auto full = ExperimentSettings::full_profile();
  CHECK(full.runs == 10);
  CHECK(full.folds == 10);
  CHECK(full.pso.n_particles == 30);
  CHECK(full.pso.max_iterations == 300);
  CHECK(full.pso.inertia == 0.729);
  CHECK(full.pso.c1 == 1.494);
  CHECK(full.epochs == 500);
  const auto desk = ExperimentSettings::desk_profile();
  CHECK(desk.runs == 3);
  CHECK(desk.folds == 5);
  CHECK(desk.pso.n_particles == 10);
  CHECK(desk.pso.max_iterations == 50);
}

TEST_CASE("random search budget equals the swarm budget per cell") {
  const Dataset ds = fixture::gaussian_classes(10, 3, 2, 2.0, 7);
  const auto s = tiny_settings();
  const auto plan = stratified_k_fold(ds, s.folds, fold_plan_seed(s.seed, 0));
  const auto rs = run_cell(MethodId::RS, ds, plan, 0, 0, s, nullptr);
  const auto pso = run_cell(MethodId::HP_FS_PSO, ds, plan, 0, 0, s, nullptr);
  CHECK(rs.evaluations == s.pso.n_particles * s.pso.max_iterations);
  CHECK(pso.evaluations == rs.evaluations);
  CHECK(rs.trace.size() == static_cast<std::size_t>(s.pso.max_iterations));
}

TEST_CASE("reported validation score is one minus the final global best") {
  const Dataset ds = fixture::gaussian_classes(10, 3, 2, 2.0, 8);
  const auto s = tiny_settings();
  const auto plan = stratified_k_fold(ds, s.folds, fold_plan_seed(s.seed, 1));
  for (auto m : {MethodId::M2, MethodId::M3, MethodId::M5, MethodId::HP_FS_PSO}) {
    const auto cell = run_cell(m, ds, plan, 1, 2, s, nullptr);
    REQUIRE_FALSE(cell.trace.empty());
    CHECK(cell.validation_bac == 1.0 - cell.trace.back().best_fitness);
  }
}

TEST_CASE("baselines use default hyperparameters") {
  const Dataset ds = fixture::gaussian_classes(10, 3, 2, 2.0, 9);
  const auto s = tiny_settings();
  const auto plan = stratified_k_fold(ds, s.folds, fold_plan_seed(s.seed, 0));
  const auto m1 = run_cell(MethodId::M1, ds, plan, 0, 1, s, nullptr);
  CHECK(m1.evaluations == 1);
  CHECK(m1.trace.empty());
  CHECK(m1.candidate.hidden_units == weka_hidden_units(5));
  CHECK(m1.candidate.learning_rate == 0.3);
  CHECK(m1.candidate.momentum == 0.2);
  CHECK(m1.candidate.selected_count() == 5);
  const auto m4 = run_cell(MethodId::M4, ds, plan, 0, 1, s, nullptr);
  REQUIRE(m4.pca_components.has_value());
  CHECK(m4.candidate.hidden_units == weka_hidden_units(*m4.pca_components));
}

TEST_CASE("test rows are read only for scoring, after final training") {
  const Dataset ds = fixture::gaussian_classes(10, 3, 2, 2.0, 10);
  const auto s = tiny_settings();
  RecordingObserver obs;
  const auto result = run_method(MethodId::HP_FS_PSO, ds, s, &obs);
  CHECK(result.cells.size() == 6);
  for (int run = 0; run < s.runs; ++run) {
    const auto plan = stratified_k_fold(ds, s.folds, fold_plan_seed(s.seed, run));
    for (int fold = 0; fold < s.folds; ++fold) {
      const auto test = plan.test_rows(fold);
      const std::set<std::size_t> test_set(test.begin(), test.end());
      std::vector<DataPhase> phases;
      for (const auto& a : obs.log) {
        if (a.run != run || a.fold != fold) continue;
        phases.push_back(a.phase);
        for (auto r : a.rows) CHECK((a.phase == DataPhase::Scoring) == (test_set.count(r) == 1));
      }
      CHECK(phases == std::vector<DataPhase>{DataPhase::Search, DataPhase::FinalTraining,
                                             DataPhase::Scoring});
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  const Dataset ds = fixture::gaussian_classes(10, 3, 2, 2.0, 11);
  auto s = tiny_settings();
  const auto one = run_method(MethodId::M3, ds, s);
  s.workers = 3;
  const auto three = run_method(MethodId::M3, ds, s);
  REQUIRE(one.cells.size() == three.cells.size());
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    CHECK(one.cells[i].validation_bac == three.cells[i].validation_bac);
    CHECK(one.cells[i].test_bac == three.cells[i].test_bac);
    CHECK(one.cells[i].candidate == three.cells[i].candidate);
    CHECK(one.cells[i].trace == three.cells[i].trace);
  }
}

TEST_CASE("methods share fold plans and inner seeds") {
  CHECK(fold_plan_seed(1, 0) == fold_plan_seed(1, 0));
  CHECK(fold_plan_seed(1, 0) != fold_plan_seed(1, 1));
  CHECK(inner_seed(1, 0, 0) != inner_seed(1, 0, 1));
  CHECK(search_seed(1, MethodId::M2, 0, 0) != search_seed(1, MethodId::M3, 0, 0));
}

TEST_CASE("settings validation") {
  auto s = ExperimentSettings::desk_profile();
  s.folds = 1;
  CHECK_THROWS(s.validate());
  s = ExperimentSettings::desk_profile();
  s.pca_variance = 1.5;
  CHECK_THROWS(s.validate());
}
