#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hpfs/experiment.hpp"

namespace {

struct DescriptorOptions {
  std::vector<int> angles{0, 90};
  hpfs::DescriptorConfig config;

  void attach(CLI::App& app) {
    app.add_option("--glcm-angles", angles, "GLCM angles in degrees (0 and/or 90)")
        ->check(CLI::IsMember({0, 90}));
    app.add_option("--glcm-distance", config.glcm_distance, "GLCM pixel offset")
        ->check(CLI::PositiveNumber);
    app.add_option("--glcm-levels", config.quantization_levels, "gray levels after quantization")
        ->check(CLI::Range(2, 256));
    app.add_option("--lbp-neighbors", config.lbp_neighbors, "LBP sampling points")
        ->check(CLI::Range(4, 64));
    app.add_option("--lbp-radius", config.lbp_radius, "LBP radius")->check(CLI::PositiveNumber);
  }

  hpfs::DescriptorConfig resolve() const {
    hpfs::DescriptorConfig c = config;
    c.glcm_angles.clear();
    for (int a : angles) c.glcm_angles.push_back(a == 0 ? hpfs::GlcmAngle::Deg0 : hpfs::GlcmAngle::Deg90);
    return c;
  }
};

struct OptimizeOptions {
  std::string dataset;
  hpfs::SyntheticSpec synthetic;
  std::vector<std::string> methods;
  std::string profile = "full";
  std::uint64_t seed = 1;
  std::string output = "experiment";
  bool resume = false;
  hpfs::SettingOverrides overrides;
  DescriptorOptions descriptor;

  void attach(CLI::App& app, bool with_methods) {
    app.add_option("--dataset", dataset, "feature CSV (synthetic textures when omitted)");
    app.add_option("--synthetic-per-class", synthetic.n_per_class, "synthetic images per class")
        ->check(CLI::PositiveNumber);
    app.add_option("--synthetic-size", synthetic.image_size, "synthetic image side in pixels");
    app.add_option("--synthetic-seed", synthetic.seed, "synthetic texture seed");
    if (with_methods)
      app.add_option("--methods", methods, "methods to run (M1 M2 M3 M4 M5 RS HP_FS_PSO)");
    app.add_option("--profile", profile, "full or desk")->check(CLI::IsMember({"full", "desk"}));
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", output, "output directory");
    app.add_flag("--resume", resume, "reuse finished cells in the output directory");
    app.add_option("--runs", overrides.runs, "repetitions");
    app.add_option("--folds", overrides.folds, "outer folds");
    app.add_option("--particles", overrides.particles, "swarm size");
    app.add_option("--iterations", overrides.iterations, "swarm iterations");
    app.add_option("--epochs", overrides.epochs, "training epochs");
    app.add_option("--workers", overrides.workers, "concurrent (run, fold) cells");
    app.add_option("--inertia", overrides.inertia, "inertia weight");
    app.add_option("--c1", overrides.c1, "cognitive coefficient");
    app.add_option("--c2", overrides.c2, "social coefficient");
    app.add_option("--pca-variance", overrides.pca_variance, "retained variance for PCA methods");
    app.add_option("--binary-vmax", overrides.binary_vmax, "velocity clamp of mask bits");
    app.add_option("--learning-rate", overrides.learning_rate, "default learning rate");
    app.add_option("--momentum", overrides.momentum, "default momentum");
    descriptor.attach(app);
  }

  hpfs::ExperimentConfig resolve(const std::vector<hpfs::MethodId>& fixed_methods) const {
    hpfs::ExperimentConfig c;
    c.dataset = dataset;
    c.synthetic = synthetic;
    if (!fixed_methods.empty()) {
      c.methods = fixed_methods;
    } else if (!methods.empty()) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(hpfs::parse_method(m));
    }
    c.profile = hpfs::parse_profile(profile);
    c.settings = hpfs::resolve_settings(c.profile, seed, overrides);
    c.descriptor = descriptor.resolve();
    c.output_dir = output;
    c.resume = resume;
    return c;
  }
};

void print_summary(const hpfs::OptimizeSummary& summary) {
  for (const auto& r : summary.results) {
    double v = 0.0, t = 0.0;
    for (const auto& c : r.cells) {
      v += c.validation_bac;
      t += c.test_bac;
    }
    const double n = static_cast<double>(r.cells.size());
    std::cout << hpfs::to_string(r.method) << ": " << r.cells.size()
              << " cells, mean validation BAC " << v / n << ", mean test BAC " << t / n << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture classification with swarm-tuned neural networks"};
  app.require_subcommand(1);
  // Keys live under [optimize] or [baselines]; unknown keys are errors.
  app.set_config("--config", "", "TOML configuration file with [optimize] / [baselines] sections");
  app.allow_config_extras(CLI::config_extras_mode::error);

  auto* synth = app.add_subcommand("synth", "write synthetic labelled textures as PGM images");
  std::string synth_out = "images";
  hpfs::SyntheticSpec synth_spec;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--per-class", synth_spec.n_per_class, "images per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--size", synth_spec.image_size, "image side in pixels");
  synth->add_option("--seed", synth_spec.seed, "generator seed");

  auto* extract = app.add_subcommand("extract", "compute the descriptor CSV for an image directory");
  std::string images_dir, extract_out = "features.csv";
  int extract_threads = 0;
  DescriptorOptions extract_descriptor;
  extract->add_option("--images", images_dir, "directory with A/ B/ C/ subdirectories")->required();
  extract->add_option("--out", extract_out, "feature CSV path");
  extract->add_option("--threads", extract_threads, "worker threads (0 = OpenMP default)");
  extract_descriptor.attach(*extract);

  auto* optimize = app.add_subcommand("optimize", "run methods and write per-cell results");
  OptimizeOptions optimize_opts;
  optimize_opts.attach(*optimize, true);
  optimize->fallthrough();

  auto* baselines = app.add_subcommand("baselines", "optimize with M1 to M5 and RS");
  OptimizeOptions baseline_opts;
  baseline_opts.attach(*baselines, false);
  baselines->fallthrough();

  auto* report = app.add_subcommand("report", "mean and SD table with Wilcoxon p-values");
  std::string results_dir = "experiment", reference = "HP_FS_PSO", pair_unit = "run";
  report->add_option("--results", results_dir, "experiment output directory");
  report->add_option("--reference", reference, "reference method");
  report->add_option("--pair-unit", pair_unit, "run (run means) or fold (fold scores)")
      ->check(CLI::IsMember({"run", "fold"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      hpfs::cmd_synth(synth_out, synth_spec);
      std::cout << "wrote " << 3 * synth_spec.n_per_class << " images to " << synth_out << "\n";
    } else if (*extract) {
      hpfs::cmd_extract(images_dir, extract_out, extract_descriptor.resolve(), extract_threads);
      std::cout << "wrote " << extract_out << "\n";
    } else if (*optimize) {
      print_summary(hpfs::cmd_optimize(optimize_opts.resolve({})));
    } else if (*baselines) {
      using hpfs::MethodId;
      print_summary(hpfs::cmd_optimize(baseline_opts.resolve(
          {MethodId::M1, MethodId::M2, MethodId::M3, MethodId::M4, MethodId::M5, MethodId::RS})));
    } else if (*report) {
      const auto table = hpfs::cmd_report(results_dir, hpfs::parse_method(reference),
                                          hpfs::parse_pair_unit(pair_unit));
      std::cout << hpfs::format_report_text(table);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
