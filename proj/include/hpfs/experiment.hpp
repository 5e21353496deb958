#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpfs/dataset.hpp"
#include "hpfs/features.hpp"
#include "hpfs/pipeline.hpp"

namespace hpfs {

// Profile values overridden individually from the command line or config file.
struct SettingOverrides {
  std::optional<int> runs, folds, particles, iterations, epochs, workers;
  std::optional<double> inertia, c1, c2, pca_variance, binary_vmax, learning_rate, momentum;
};

enum class Profile { Full, Desk };

Profile parse_profile(std::string_view name);
std::string_view to_string(Profile p);

ExperimentSettings resolve_settings(Profile profile, std::uint64_t seed,
                                    const SettingOverrides& overrides);

struct SyntheticSpec {
  int n_per_class = 50;
  int image_size = 64;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  std::filesystem::path dataset;  // feature CSV; empty means synthetic
  SyntheticSpec synthetic;
  std::vector<MethodId> methods = all_methods();
  Profile profile = Profile::Full;
  ExperimentSettings settings = ExperimentSettings::full_profile();
  DescriptorConfig descriptor;
  std::filesystem::path output_dir = "experiment";
  bool resume = false;
};

// Synthetic textures run through the descriptor extractor.
Dataset synthetic_feature_dataset(const SyntheticSpec& spec, const DescriptorConfig& descriptor = {},
                                  int threads = 0);

// Images in `<dir>/{A,B,C}/*.pgm`, classes in A, B, C order, files sorted by name.
Dataset extract_directory(const std::filesystem::path& image_dir,
                          const DescriptorConfig& descriptor = {}, int threads = 0);

// `synth`: writes `<out>/{A,B,C}/img_NNNN.pgm`.
void cmd_synth(const std::filesystem::path& out_dir, const SyntheticSpec& spec);

// `extract`: writes the feature CSV for an image directory.
void cmd_extract(const std::filesystem::path& image_dir, const std::filesystem::path& out_csv,
                 const DescriptorConfig& descriptor = {}, int threads = 0);

// Output layout under config.output_dir:
//   meta.toml                           every setting and fixed modelling choice
//   results/<METHOD>/<run>_<fold>.jsonl one record per finished cell
//   results/<METHOD>.jsonl              merged records, written when the method completes
//   results/<METHOD>.incomplete         present while a method is unfinished
//   traces/<METHOD>/<run>_<fold>.csv    convergence traces of search methods
struct OptimizeSummary {
  std::vector<ExperimentResult> results;
};

OptimizeSummary cmd_optimize(const ExperimentConfig& config, AccessObserver* observer = nullptr);

// JSON-lines record for one cell.
nlohmann::ordered_json cell_to_json(MethodId method, const CellResult& cell,
                                    const ExperimentSettings& settings);
CellResult cell_from_json(const nlohmann::json& record);

std::string trace_relative_path(MethodId method, int run, int fold);

// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_meta(const ExperimentConfig& config, std::string_view status,
                const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reporting

enum class PairUnit { Run, Fold };

PairUnit parse_pair_unit(std::string_view name);

struct PValueCell {
  std::optional<double> p_value;
  std::string note;  // "Ref." or the reason no p-value is available
};

struct ReportRow {
  MethodId method;
  double validation_mean = 0.0, validation_sd = 0.0;
  double test_mean = 0.0, test_sd = 0.0;
  PValueCell validation_p, test_p;
  int runs = 0;
  int cells = 0;
};

struct ReportTable {
  MethodId reference;
  PairUnit pair_unit = PairUnit::Run;
  std::vector<ReportRow> rows;  // method order
};

struct LoadedMethod {
  MethodId method;
  std::vector<CellResult> cells;
};

// Reads merged results from `<results_dir>/results`. Fails on incomplete
// methods, fewer than two methods, or run/fold layouts that differ.
std::vector<LoadedMethod> load_results(const std::filesystem::path& results_dir);

ReportTable build_report(const std::vector<LoadedMethod>& methods, MethodId reference,
                         PairUnit pair_unit = PairUnit::Run);

std::string format_report_text(const ReportTable& table);
std::string format_report_csv(const ReportTable& table);

// Long-format mean convergence curves:
// `method,iteration,mean_best_fitness,mean_mean_fitness,best_bac`.
std::string format_convergence_csv(const std::filesystem::path& results_dir,
                                   const std::vector<LoadedMethod>& methods);

// `report`: writes report.txt, report.csv and convergence.csv into
// `results_dir` and returns the table.
ReportTable cmd_report(const std::filesystem::path& results_dir, MethodId reference,
                       PairUnit pair_unit = PairUnit::Run);

}  // namespace hpfs
