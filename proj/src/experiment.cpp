#include "hpfs/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hpfs/stats.hpp"

namespace fs = std::filesystem;

namespace hpfs {

Profile parse_profile(std::string_view name) {
  if (name == "full") return Profile::Full;
  if (name == "desk") return Profile::Desk;
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected full or desk)");
}

std::string_view to_string(Profile p) { return p == Profile::Full ? "full" : "desk"; }

ExperimentSettings resolve_settings(Profile profile, std::uint64_t seed,
                                    const SettingOverrides& o) {
  ExperimentSettings s = profile == Profile::Full ? ExperimentSettings::full_profile()
                                                  : ExperimentSettings::desk_profile();
  s.seed = seed;
  if (o.runs) s.runs = *o.runs;
  if (o.folds) s.folds = *o.folds;
  if (o.particles) s.pso.n_particles = *o.particles;
  if (o.iterations) s.pso.max_iterations = *o.iterations;
  if (o.epochs) s.epochs = *o.epochs;
  if (o.workers) s.workers = *o.workers;
  if (o.inertia) s.pso.inertia = *o.inertia;
  if (o.c1) s.pso.c1 = *o.c1;
  if (o.c2) s.pso.c2 = *o.c2;
  if (o.pca_variance) s.pca_variance = *o.pca_variance;
  if (o.binary_vmax) s.binary_vmax = *o.binary_vmax;
  if (o.learning_rate) s.defaults.learning_rate = *o.learning_rate;
  if (o.momentum) s.defaults.momentum = *o.momentum;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Images and features

Dataset synthetic_feature_dataset(const SyntheticSpec& spec, const DescriptorConfig& descriptor,
                                  int threads) {
  const auto textures = generate_synthetic_textures(spec.n_per_class, spec.image_size, spec.seed);
  auto rows = extract_batch(textures.images, descriptor, threads);
  std::vector<Sample> samples(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) samples[i] = {std::move(rows[i]), textures.labels[i]};
  return Dataset(std::move(samples), descriptor_names(descriptor));
}

Dataset extract_directory(const fs::path& image_dir, const DescriptorConfig& descriptor,
                          int threads) {
  if (!fs::is_directory(image_dir))
    throw std::runtime_error("image directory not found: " + image_dir.string());
  std::vector<GrayImage> images;
  std::vector<ClassLabel> labels;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto label = label_from_index(c);
    const fs::path dir = image_dir / std::string(to_string(label));
    if (!fs::is_directory(dir))
      throw std::runtime_error("missing class directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    if (files.empty()) throw std::runtime_error("class directory " + dir.string() + " has no .pgm images");
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      images.push_back(read_pgm(f));
      labels.push_back(label);
    }
  }
  auto rows = extract_batch(images, descriptor, threads);
  std::vector<Sample> samples(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) samples[i] = {std::move(rows[i]), labels[i]};
  return Dataset(std::move(samples), descriptor_names(descriptor));
}

void cmd_synth(const fs::path& out_dir, const SyntheticSpec& spec) {
  const auto textures = generate_synthetic_textures(spec.n_per_class, spec.image_size, spec.seed);
  std::vector<int> counter(kNumClasses, 0);
  for (int c = 0; c < kNumClasses; ++c)
    fs::create_directories(out_dir / std::string(to_string(label_from_index(c))));
  for (std::size_t i = 0; i < textures.images.size(); ++i) {
    const auto label = textures.labels[i];
    char name[32];
    std::snprintf(name, sizeof name, "img_%04d.pgm", counter[class_index(label)]++);
    write_pgm(textures.images[i], out_dir / std::string(to_string(label)) / name);
  }
}

void cmd_extract(const fs::path& image_dir, const fs::path& out_csv,
                 const DescriptorConfig& descriptor, int threads) {
  const Dataset ds = extract_directory(image_dir, descriptor, threads);
  std::ostringstream out;
  write_feature_table(ds, out);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  write_file_atomic(out_csv, out.str());
}

// ---------------------------------------------------------------------------
// Result files

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string trace_relative_path(MethodId method, int run, int fold) {
  return "traces/" + std::string(to_string(method)) + "/" + std::to_string(run) + "_" +
         std::to_string(fold) + ".csv";
}

namespace {

std::string mask_string(const std::vector<bool>& mask) {
  std::string s;
  for (bool b : mask) s.push_back(b ? '1' : '0');
  return s;
}

fs::path cell_path(const fs::path& out, MethodId m, int run, int fold) {
  return out / "results" / std::string(to_string(m)) /
         (std::to_string(run) + "_" + std::to_string(fold) + ".jsonl");
}

}  // namespace

nlohmann::ordered_json cell_to_json(MethodId method, const CellResult& cell,
                                    const ExperimentSettings& settings) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(method));
  j["run"] = cell.run;
  j["fold"] = cell.fold;
  j["validation_bac"] = cell.validation_bac;
  j["test_bac"] = cell.test_bac;
  j["evaluations"] = cell.evaluations;
  nlohmann::ordered_json c;
  c["hidden_units"] = cell.candidate.hidden_units;
  c["learning_rate"] = cell.candidate.learning_rate;
  c["momentum"] = cell.candidate.momentum;
  c["feature_mask"] = mask_string(cell.candidate.feature_mask);
  c["selected_features"] = cell.candidate.selected_count();
  j["candidate"] = c;
  if (cell.pca_components) {
    j["pca"] = {{"components", *cell.pca_components}, {"variance_threshold", settings.pca_variance}};
  } else {
    j["pca"] = nullptr;
  }
  j["final_training_failed"] = cell.final_training_failed;
  if (cell.trace.empty()) {
    j["trace"] = nullptr;
  } else {
    j["trace"] = trace_relative_path(method, cell.run, cell.fold);
  }
  return j;
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult cell;
  cell.run = j.at("run").get<int>();
  cell.fold = j.at("fold").get<int>();
  cell.validation_bac = j.at("validation_bac").get<double>();
  cell.test_bac = j.at("test_bac").get<double>();
  cell.evaluations = j.at("evaluations").get<long long>();
  const auto& c = j.at("candidate");
  cell.candidate.hidden_units = c.at("hidden_units").get<int>();
  cell.candidate.learning_rate = c.at("learning_rate").get<double>();
  cell.candidate.momentum = c.at("momentum").get<double>();
  for (char ch : c.at("feature_mask").get<std::string>()) {
    if (ch != '0' && ch != '1') throw std::runtime_error("malformed feature mask in result record");
    cell.candidate.feature_mask.push_back(ch == '1');
  }
  if (j.contains("pca") && !j["pca"].is_null()) cell.pca_components = j["pca"].at("components").get<int>();
  cell.final_training_failed = j.value("final_training_failed", false);
  return cell;
}

void write_meta(const ExperimentConfig& config, std::string_view status, const fs::path& path) {
  const auto& s = config.settings;
  const auto& d = config.descriptor;
  std::ostringstream m;
  auto str = [](std::string_view v) { return "\"" + std::string(v) + "\""; };
  m << "# experiment metadata\n";
  m << "status = " << str(status) << "\n\n";
  m << "[experiment]\n";
  m << "profile = " << str(to_string(config.profile)) << "\n";
  m << "seed = " << s.seed << "\n";
  m << "runs = " << s.runs << "\n";
  m << "folds = " << s.folds << "\n";
  m << "workers = " << s.workers << "\n";
  m << "methods = [";
  for (std::size_t i = 0; i < config.methods.size(); ++i)
    m << (i ? ", " : "") << str(to_string(config.methods[i]));
  m << "]\n";
  if (config.dataset.empty()) {
    m << "dataset = \"synthetic\"\n";
    m << "synthetic_per_class = " << config.synthetic.n_per_class << "\n";
    m << "synthetic_image_size = " << config.synthetic.image_size << "\n";
    m << "synthetic_seed = " << config.synthetic.seed << "\n";
  } else {
    m << "dataset = " << str(config.dataset.string()) << "\n";
  }
  m << "\n[cross_validation]\n";
  m << "outer = \"stratified k-fold, per-class shuffle then round-robin deal\"\n";
  m << "inner = \"single stratified holdout\"\n";
  m << "inner_validation_fraction = " << format_real(kValidationFraction) << "\n";
  m << "final_model = \"winner retrained on the full outer-training portion\"\n";
  m << "fitness = \"1 - validation balanced accuracy\"\n";
  m << "degenerate_candidate_fitness = 1\n";
  m << "\n[swarm]\n";
  m << "particles = " << s.pso.n_particles << "\n";
  m << "iterations = " << s.pso.max_iterations << "\n";
  m << "inertia = " << format_real(s.pso.inertia) << "\n";
  m << "c1 = " << format_real(s.pso.c1) << "\n";
  m << "c2 = " << format_real(s.pso.c2) << "\n";
  m << "topology = \"global best\"\n";
  m << "update = \"synchronous\"\n";
  m << "vmax_rule = \"upper bound of the range; binary dims use binary_vmax\"\n";
  m << "binary_vmax = " << format_real(s.binary_vmax) << "\n";
  m << "binarization = \"1 if logistic(v) > r3, r3 ~ U(0,1) per dimension\"\n";
  m << "out_of_bounds = \"clip position, keep velocity\"\n";
  m << "integer_dims = \"continuous, rounded at decode\"\n";
  m << "random_draws = \"per dimension, per (particle, iteration) substream\"\n";
  m << "random_search_budget = " << static_cast<long long>(s.pso.n_particles) * s.pso.max_iterations << "\n";
  m << "\n[network]\n";
  m << "hidden_layers = 1\n";
  m << "hidden_units_range = [" << kMinHiddenUnits << ", " << kMaxHiddenUnits << "]\n";
  m << "default_hidden_units = \"(attributes + classes) / 2, floor, on the network input width\"\n";
  m << "default_learning_rate = " << format_real(s.defaults.learning_rate) << "\n";
  m << "default_momentum = " << format_real(s.defaults.momentum) << "\n";
  m << "epochs = " << s.epochs << "\n";
  m << "learning_rate_floor = " << format_real(kMinLearningRate) << "\n";
  m << "momentum_cap = " << format_real(kMaxMomentum) << "\n";
  m << "activation = \"logistic hidden, softmax output\"\n";
  m << "loss = \"mean cross-entropy\"\n";
  m << "batch = \"full batch gradient descent with momentum\"\n";
  m << "init = \"uniform in +-1/sqrt(fan_in), zero biases\"\n";
  m << "standardization = \"z-score with training-portion statistics\"\n";
  m << "\n[pca]\n";
  m << "variance_threshold = " << format_real(s.pca_variance) << "\n";
  m << "scaling = \"standardize with training-portion statistics\"\n";
  m << "\n[descriptor]\n";
  m << "glcm_angles = [";
  for (std::size_t i = 0; i < d.glcm_angles.size(); ++i) m << (i ? ", " : "") << angle_degrees(d.glcm_angles[i]);
  m << "]\n";
  m << "glcm_distance = " << d.glcm_distance << "\n";
  m << "glcm_levels = " << d.quantization_levels << "\n";
  m << "glcm_symmetric = true\n";
  m << "glcm_zero_variance_correlation = 1\n";
  m << "lbp_neighbors = " << d.lbp_neighbors << "\n";
  m << "lbp_radius = " << d.lbp_radius << "\n";
  m << "lbp_mapping = \"uniform, P + 2 bins\"\n";
  m << "lbp_bit_rule = \"neighbor >= center\"\n";
  m << "lbp_border = \"skip pixels closer than the radius to the edge\"\n";
  m << "\n[statistics]\n";
  m << "test = \"two-sided Wilcoxon signed-rank, zero differences dropped\"\n";
  m << "exact_up_to = " << kWilcoxonExactLimit << "\n";
  m << "alpha = " << format_real(kSignificanceLevel) << "\n";
  m << "default_pair_unit = \"run mean\"\n";
  write_file_atomic(path, m.str());
}

OptimizeSummary cmd_optimize(const ExperimentConfig& config, AccessObserver* observer) {
  config.settings.validate();
  if (config.methods.empty()) throw std::invalid_argument("no methods requested");
  const fs::path out = config.output_dir;
  fs::create_directories(out / "results");
  fs::create_directories(out / "traces");
  write_meta(config, "incomplete", out / "meta.toml");

  const Dataset dataset = config.dataset.empty()
                              ? synthetic_feature_dataset(config.synthetic, config.descriptor)
                              : load_feature_table(config.dataset);

  OptimizeSummary summary;
  for (MethodId method : config.methods) {
    const std::string name(to_string(method));
    fs::create_directories(out / "results" / name);
    fs::create_directories(out / "traces" / name);
    const fs::path marker = out / "results" / (name + ".incomplete");
    write_file_atomic(marker, "cells are written to results/" + name + "/ as they finish\n");
    fs::remove(out / "results" / (name + ".jsonl"));

    CellHooks hooks;
    hooks.on_complete = [&](const CellResult& cell) {
      if (!cell.trace.empty()) {
        std::ostringstream t;
        write_trace_csv(cell.trace, t);
        write_file_atomic(out / trace_relative_path(method, cell.run, cell.fold), t.str());
      }
      write_file_atomic(cell_path(out, method, cell.run, cell.fold),
                        cell_to_json(method, cell, config.settings).dump() + "\n");
    };
    if (config.resume) {
      hooks.lookup = [&](int run, int fold) -> std::optional<CellResult> {
        const fs::path p = cell_path(out, method, run, fold);
        if (!fs::exists(p)) return std::nullopt;
        std::ifstream in(p);
        std::string line;
        if (!std::getline(in, line) || line.empty()) return std::nullopt;
        CellResult cell = cell_from_json(nlohmann::json::parse(line));
        const fs::path tp = out / trace_relative_path(method, run, fold);
        if (fs::exists(tp)) {
          std::ifstream tin(tp);
          cell.trace = read_trace_csv(tin);
        } else if (uses_swarm(method) || method == MethodId::RS) {
          return std::nullopt;
        }
        return cell;
      };
    }

    ExperimentResult result = run_method(method, dataset, config.settings, observer, &hooks);
    std::string merged;
    for (const auto& cell : result.cells)
      merged += cell_to_json(method, cell, config.settings).dump() + "\n";
    write_file_atomic(out / "results" / (name + ".jsonl"), merged);
    fs::remove(marker);
    summary.results.push_back(std::move(result));
  }
  write_meta(config, "complete", out / "meta.toml");
  return summary;
}

}  // namespace hpfs
