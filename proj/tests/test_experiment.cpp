#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "hpfs/experiment.hpp"

using namespace hpfs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("hpfs_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(const fs::path& csv, const fs::path& out,
                              std::vector<MethodId> methods) {
  ExperimentConfig c;
  c.dataset = csv;
  c.methods = std::move(methods);
  c.profile = Profile::Desk;
  SettingOverrides o;
  o.particles = 3;
  o.iterations = 2;
  o.epochs = 30;
  c.settings = resolve_settings(Profile::Desk, 3, o);
  c.output_dir = out;
  return c;
}

fs::path write_fixture_csv(const fs::path& dir) {
  const auto ds = fixture::gaussian_classes(10, 3, 3, 2.0, 1);
  const fs::path p = dir / "features.csv";
  save_feature_table(ds, p);
  return p;
}

class FailingObserver : public AccessObserver {
 public:
  explicit FailingObserver(int after) : remaining_(after) {}
  void on_access(const DataAccess&) override {
    bool fail = false;
#pragma omp critical(failing_observer)
    fail = --remaining_ < 0;
    if (fail) throw std::runtime_error("simulated interruption");
  }

 private:
  int remaining_;
};

}  // namespace

TEST_CASE("synth then extract gives one row per image") {
  TempDir tmp("extract");
  cmd_synth(tmp.path / "img", {50, 64, 7});
  for (const char* c : {"A", "B", "C"}) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(tmp.path / "img" / c)) n += e.path().extension() == ".pgm";
    CHECK(n == 50);
  }
  cmd_extract(tmp.path / "img", tmp.path / "f.csv");
  const std::string first = slurp(tmp.path / "f.csv");
  std::istringstream lines(first);
  std::string header, line;
  std::getline(lines, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 38);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 38);
  }
  CHECK(rows == 150);
  cmd_extract(tmp.path / "img", tmp.path / "g.csv");
  CHECK(slurp(tmp.path / "g.csv") == first);
  CHECK(load_feature_table(tmp.path / "f.csv") == synthetic_feature_dataset({50, 64, 7}));
}

TEST_CASE("extraction errors on missing or empty class directories") {
  TempDir tmp("extract_err");
  CHECK_THROWS(cmd_extract(tmp.path / "nothing", tmp.path / "f.csv"));
  fs::create_directories(tmp.path / "img" / "A");
  fs::create_directories(tmp.path / "img" / "B");
  fs::create_directories(tmp.path / "img" / "C");
  CHECK_THROWS_WITH(cmd_extract(tmp.path / "img", tmp.path / "f.csv"), doctest::Contains("no .pgm"));
}

TEST_CASE("PGM round trip") {
  TempDir tmp("pgm");
  GrayImage img(5, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) img.at(r, c) = static_cast<std::uint8_t>(r * 50 + c);
  write_pgm(img, tmp.path / "x.pgm");
  CHECK(read_pgm(tmp.path / "x.pgm") == img);
  {
    std::ofstream out(tmp.path / "ascii.pgm");
    out << "P2\n# comment\n2 1\n255\n7 200\n";
  }
  const auto a = read_pgm(tmp.path / "ascii.pgm");
  CHECK(a.at(0, 0) == 7);
  CHECK(a.at(0, 1) == 200);
  CHECK_THROWS(read_pgm(tmp.path / "missing.pgm"));
}

TEST_CASE("optimize writes results, traces and metadata") {
  TempDir tmp("optimize");
  const auto csv = write_fixture_csv(tmp.path);
  const auto cfg = small_config(csv, tmp.path / "exp", {MethodId::M1, MethodId::HP_FS_PSO});
  const auto summary = cmd_optimize(cfg);
  CHECK(summary.results.size() == 2);
  CHECK(fs::exists(tmp.path / "exp" / "results" / "M1.jsonl"));
  CHECK(fs::exists(tmp.path / "exp" / "results" / "HP_FS_PSO.jsonl"));
  CHECK_FALSE(fs::exists(tmp.path / "exp" / "results" / "M1.incomplete"));
  int traces = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "exp" / "traces" / "HP_FS_PSO")) {
    (void)e;
    ++traces;
  }
  CHECK(traces == 15);
  CHECK(fs::is_empty(tmp.path / "exp" / "traces" / "M1"));

  const std::string meta = slurp(tmp.path / "exp" / "meta.toml");
  CHECK(meta.find("status = \"complete\"") != std::string::npos);
  for (const char* key : {"inner = ", "binary_vmax = ", "lbp_bit_rule", "glcm_levels = 8",
                          "variance_threshold = 0.95", "default_pair_unit", "final_model"})
    CHECK(meta.find(key) != std::string::npos);

  std::ifstream in(tmp.path / "exp" / "results" / "HP_FS_PSO.jsonl");
  std::string line;
  int records = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["method"] == "HP_FS_PSO");
    CHECK(j["evaluations"] == 6);
    CHECK(j["candidate"]["feature_mask"].get<std::string>().size() == 6);
    CHECK(fs::exists(tmp.path / "exp" / j["trace"].get<std::string>()));
    ++records;
  }
  CHECK(records == 15);
}

TEST_CASE("JSON records round trip") {
  CellResult c;
  c.run = 2;
  c.fold = 4;
  c.validation_bac = 0.8123456789;
  c.test_bac = 0.7;
  c.evaluations = 500;
  c.candidate.hidden_units = 12;
  c.candidate.learning_rate = 0.01;
  c.candidate.momentum = 0.9;
  c.candidate.feature_mask = {true, false, true};
  c.pca_components = 4;
  const auto j = cell_to_json(MethodId::M5, c, ExperimentSettings::desk_profile());
  const CellResult back = cell_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.validation_bac == c.validation_bac);
  CHECK(back.candidate == c.candidate);
  CHECK(back.pca_components == c.pca_components);
  CHECK(back.evaluations == 500);
}

TEST_CASE("interrupted runs stay marked incomplete and resume to the same result") {
  TempDir tmp("resume");
  const auto csv = write_fixture_csv(tmp.path);
  auto cfg = small_config(csv, tmp.path / "exp", {MethodId::M3});
  FailingObserver fail_after(20);
  CHECK_THROWS(cmd_optimize(cfg, &fail_after));
  CHECK(fs::exists(tmp.path / "exp" / "results" / "M3.incomplete"));
  CHECK_FALSE(fs::exists(tmp.path / "exp" / "results" / "M3.jsonl"));
  CHECK(slurp(tmp.path / "exp" / "meta.toml").find("status = \"incomplete\"") != std::string::npos);
  CHECK_THROWS_WITH(load_results(tmp.path / "exp"), doctest::Contains("incomplete"));

  cfg.resume = true;
  cmd_optimize(cfg);
  CHECK_FALSE(fs::exists(tmp.path / "exp" / "results" / "M3.incomplete"));
  const std::string resumed = slurp(tmp.path / "exp" / "results" / "M3.jsonl");

  auto fresh = small_config(csv, tmp.path / "fresh", {MethodId::M3});
  cmd_optimize(fresh);
  CHECK(slurp(tmp.path / "fresh" / "results" / "M3.jsonl") == resumed);
}

TEST_CASE("report against the reference method") {
  TempDir tmp("report");
  const auto csv = write_fixture_csv(tmp.path);
  auto cfg = small_config(csv, tmp.path / "exp", {MethodId::M1, MethodId::RS, MethodId::HP_FS_PSO});
  cfg.settings.runs = 6;
  cmd_optimize(cfg);
  const auto table = cmd_report(tmp.path / "exp", MethodId::HP_FS_PSO);
  REQUIRE(table.rows.size() == 3);
  for (const auto& r : table.rows) {
    CHECK(r.runs == 6);
    CHECK(r.cells == 30);
    if (r.method == MethodId::HP_FS_PSO) {
      CHECK(r.validation_p.note == "Ref.");
      CHECK(r.test_p.note == "Ref.");
    } else {
      CHECK((r.validation_p.p_value.has_value() || !r.validation_p.note.empty()));
    }
  }
  const std::string text = slurp(tmp.path / "exp" / "report.txt");
  CHECK(text.find("Ref.") != std::string::npos);
  const std::string csv_out = slurp(tmp.path / "exp" / "report.csv");
  CHECK(csv_out.rfind("method,validation_mean", 0) == 0);
  std::istringstream conv(slurp(tmp.path / "exp" / "convergence.csv"));
  std::string line;
  std::getline(conv, line);
  CHECK(line == "method,iteration,mean_best_fitness,mean_mean_fitness,best_bac");
  int rows = 0;
  while (std::getline(conv, line)) ++rows;
  CHECK(rows == 2 * 2);  // RS and HP_FS_PSO, two iterations each
}

TEST_CASE("report needs two complete methods") {
  TempDir tmp("report_single");
  const auto csv = write_fixture_csv(tmp.path);
  cmd_optimize(small_config(csv, tmp.path / "exp", {MethodId::M1}));
  CHECK_THROWS_WITH(cmd_report(tmp.path / "exp", MethodId::M1), doctest::Contains("at least two"));
}

TEST_CASE("identical scores surface degenerate pairing per row") {
  std::vector<LoadedMethod> methods;
  for (auto m : {MethodId::M1, MethodId::M2, MethodId::HP_FS_PSO}) {
    LoadedMethod lm{m, {}};
    for (int run = 0; run < 6; ++run) {
      CellResult c;
      c.run = run;
      c.validation_bac = 0.8;
      c.test_bac = 0.75;
      lm.cells.push_back(c);
    }
    methods.push_back(lm);
  }
  const auto table = build_report(methods, MethodId::HP_FS_PSO);
  CHECK(table.rows[0].validation_p.note == "degenerate pairing");
  CHECK_FALSE(table.rows[0].validation_p.p_value.has_value());
  const std::string text = format_report_text(table);
  CHECK(text.find("degenerate pairing") != std::string::npos);
  CHECK(text.find("Ref.") != std::string::npos);
}

TEST_CASE("run-mean pairing with few runs reports too few pairs; fold pairing does not") {
  std::vector<LoadedMethod> methods;
  for (int k = 0; k < 2; ++k) {
    LoadedMethod lm{k ? MethodId::HP_FS_PSO : MethodId::M1, {}};
    for (int run = 0; run < 3; ++run)
      for (int fold = 0; fold < 5; ++fold) {
        CellResult c;
        c.run = run;
        c.fold = fold;
        c.validation_bac = 0.7 + 0.01 * fold + 0.1 * k + 0.001 * run;
        c.test_bac = c.validation_bac;
        lm.cells.push_back(c);
      }
    methods.push_back(lm);
  }
  CHECK(build_report(methods, MethodId::HP_FS_PSO).rows[0].test_p.note == "too few pairs");
  const auto by_fold = build_report(methods, MethodId::HP_FS_PSO, PairUnit::Fold);
  REQUIRE(by_fold.rows[0].test_p.p_value.has_value());
  CHECK(*by_fold.rows[0].test_p.p_value < 0.05);
}

TEST_CASE("mismatched run layouts are rejected") {
  TempDir tmp("mismatch");
  const auto csv = write_fixture_csv(tmp.path);
  auto a = small_config(csv, tmp.path / "exp", {MethodId::M1});
  cmd_optimize(a);
  auto b = small_config(csv, tmp.path / "exp", {MethodId::M4});
  b.settings.runs = 2;
  cmd_optimize(b);
  CHECK_THROWS_WITH(load_results(tmp.path / "exp"), doctest::Contains("layout"));
}

TEST_CASE("profile settings resolve with overrides") {
  SettingOverrides o;
  o.runs = 4;
  o.inertia = 0.5;
  const auto s = resolve_settings(Profile::Desk, 9, o);
  CHECK(s.runs == 4);
  CHECK(s.folds == 5);
  CHECK(s.pso.inertia == 0.5);
  CHECK(s.seed == 9);
  CHECK(parse_profile("full") == Profile::Full);
  CHECK_THROWS(parse_profile("huge"));
  o.folds = 1;
  CHECK_THROWS(resolve_settings(Profile::Full, 1, o));
}
