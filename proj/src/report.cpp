#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hpfs/experiment.hpp"
#include "hpfs/stats.hpp"

namespace fs = std::filesystem;

namespace hpfs {

PairUnit parse_pair_unit(std::string_view name) {
  if (name == "run") return PairUnit::Run;
  if (name == "fold") return PairUnit::Fold;
  throw std::invalid_argument("unknown pair unit '" + std::string(name) + "' (expected run or fold)");
}

std::vector<LoadedMethod> load_results(const fs::path& results_dir) {
  const fs::path dir = results_dir / "results";
  if (!fs::is_directory(dir)) throw std::runtime_error("no results directory under " + results_dir.string());
  std::vector<LoadedMethod> loaded;
  for (MethodId m : all_methods()) {
    const std::string name(to_string(m));
    if (fs::exists(dir / (name + ".incomplete")))
      throw std::runtime_error("results for " + name + " are incomplete");
    const fs::path merged = dir / (name + ".jsonl");
    if (!fs::exists(merged)) continue;
    std::ifstream in(merged);
    LoadedMethod lm{m, {}};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        lm.cells.push_back(cell_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw std::runtime_error(merged.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (lm.cells.empty()) throw std::runtime_error("results for " + name + " are empty");
    std::sort(lm.cells.begin(), lm.cells.end(), [](const CellResult& a, const CellResult& b) {
      return std::pair(a.run, a.fold) < std::pair(b.run, b.fold);
    });
    loaded.push_back(std::move(lm));
  }
  if (loaded.size() < 2)
    throw std::runtime_error("report needs complete results for at least two methods, found " +
                             std::to_string(loaded.size()));
  auto layout = [](const LoadedMethod& lm) {
    std::set<std::pair<int, int>> cells;
    for (const auto& c : lm.cells) cells.emplace(c.run, c.fold);
    return cells;
  };
  const auto first = layout(loaded.front());
  for (const auto& lm : loaded) {
    if (layout(lm) != first)
      throw std::runtime_error("run/fold layout of " + std::string(to_string(lm.method)) +
                               " differs from " + std::string(to_string(loaded.front().method)));
  }
  return loaded;
}

namespace {

struct PairedScores {
  std::vector<double> validation, test;
  int runs = 0;
};

PairedScores paired_scores(const LoadedMethod& lm, PairUnit unit) {
  PairedScores out;
  std::map<int, std::pair<double, double>> sums;
  std::map<int, int> counts;
  for (const auto& c : lm.cells) {
    sums[c.run].first += c.validation_bac;
    sums[c.run].second += c.test_bac;
    ++counts[c.run];
    if (unit == PairUnit::Fold) {
      out.validation.push_back(c.validation_bac);
      out.test.push_back(c.test_bac);
    }
  }
  out.runs = static_cast<int>(sums.size());
  if (unit == PairUnit::Run) {
    for (const auto& [run, s] : sums) {
      out.validation.push_back(s.first / counts[run]);
      out.test.push_back(s.second / counts[run]);
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PValueCell compare(const std::vector<double>& a, const std::vector<double>& ref) {
  PValueCell cell;
  try {
    cell.p_value = wilcoxon_signed_rank(a, ref).p_value;
  } catch (const DegeneratePairing&) {
    cell.note = "degenerate pairing";
  } catch (const std::invalid_argument&) {
    cell.note = "too few pairs";
  }
  return cell;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string p_text(const PValueCell& p) {
  if (p.p_value) {
    if (*p.p_value < 1e-4) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2e", *p.p_value);
      return buf;
    }
    return fixed(*p.p_value, 4);
  }
  return p.note;
}

}  // namespace

ReportTable build_report(const std::vector<LoadedMethod>& methods, MethodId reference,
                         PairUnit pair_unit) {
  if (methods.size() < 2) throw std::invalid_argument("report needs at least two methods");
  const auto ref_it = std::find_if(methods.begin(), methods.end(),
                                   [&](const LoadedMethod& lm) { return lm.method == reference; });
  if (ref_it == methods.end())
    throw std::invalid_argument("reference method " + std::string(to_string(reference)) +
                                " has no results");
  const PairedScores ref = paired_scores(*ref_it, pair_unit);

  ReportTable table{reference, pair_unit, {}};
  for (const auto& lm : methods) {
    const PairedScores run_level = paired_scores(lm, PairUnit::Run);
    const PairedScores paired = paired_scores(lm, pair_unit);
    if (paired.validation.size() != ref.validation.size())
      throw std::runtime_error("mismatched run counts between " + std::string(to_string(lm.method)) +
                               " and the reference");
    ReportRow row;
    row.method = lm.method;
    row.validation_mean = mean(run_level.validation);
    row.validation_sd = sample_sd(run_level.validation);
    row.test_mean = mean(run_level.test);
    row.test_sd = sample_sd(run_level.test);
    row.runs = run_level.runs;
    row.cells = static_cast<int>(lm.cells.size());
    if (lm.method == reference) {
      row.validation_p.note = "Ref.";
      row.test_p.note = "Ref.";
    } else {
      row.validation_p = compare(paired.validation, ref.validation);
      row.test_p = compare(paired.test, ref.test);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_report_text(const ReportTable& table) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-18s %-20s %-18s %-20s\n", "Method", "Validation BAC",
                "p (validation)", "Test BAC", "p (test)");
  out << line;
  for (const auto& r : table.rows) {
    const std::string v = fixed(r.validation_mean, 3) + " +- " + fixed(r.validation_sd, 3);
    const std::string t = fixed(r.test_mean, 3) + " +- " + fixed(r.test_sd, 3);
    std::snprintf(line, sizeof line, "%-10s %-18s %-20s %-18s %-20s\n",
                  std::string(to_string(r.method)).c_str(), v.c_str(), p_text(r.validation_p).c_str(),
                  t.c_str(), p_text(r.test_p).c_str());
    out << line;
  }
  out << "\nreference: " << to_string(table.reference)
      << "; two-sided Wilcoxon signed-rank paired by "
      << (table.pair_unit == PairUnit::Run ? "run mean" : "fold score")
      << "; SD across run means\n";
  return out.str();
}

std::string format_report_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "method,validation_mean,validation_sd,validation_p,test_mean,test_sd,test_p,runs,cells\n";
  auto p_field = [](const PValueCell& p) {
    return p.p_value ? format_real(*p.p_value) : p.note;
  };
  for (const auto& r : table.rows) {
    out << to_string(r.method) << ',' << format_real(r.validation_mean) << ','
        << format_real(r.validation_sd) << ',' << p_field(r.validation_p) << ','
        << format_real(r.test_mean) << ',' << format_real(r.test_sd) << ',' << p_field(r.test_p)
        << ',' << r.runs << ',' << r.cells << '\n';
  }
  return out.str();
}

std::string format_convergence_csv(const fs::path& results_dir,
                                   const std::vector<LoadedMethod>& methods) {
  std::ostringstream out;
  out << "method,iteration,mean_best_fitness,mean_mean_fitness,best_bac\n";
  for (const auto& lm : methods) {
    std::map<int, std::pair<double, double>> sums;
    std::map<int, int> counts;
    for (const auto& c : lm.cells) {
      const fs::path p = results_dir / trace_relative_path(lm.method, c.run, c.fold);
      if (!fs::exists(p)) continue;
      std::ifstream in(p);
      for (const auto& rec : read_trace_csv(in)) {
        sums[rec.iteration].first += rec.best_fitness;
        sums[rec.iteration].second += rec.mean_fitness;
        ++counts[rec.iteration];
      }
    }
    for (const auto& [it, s] : sums) {
      const double best = s.first / counts[it];
      const double avg = s.second / counts[it];
      out << to_string(lm.method) << ',' << it << ',' << format_real(best) << ','
          << format_real(avg) << ',' << format_real(1.0 - best) << '\n';
    }
  }
  return out.str();
}

ReportTable cmd_report(const fs::path& results_dir, MethodId reference, PairUnit pair_unit) {
  const auto methods = load_results(results_dir);
  ReportTable table = build_report(methods, reference, pair_unit);
  write_file_atomic(results_dir / "report.txt", format_report_text(table));
  write_file_atomic(results_dir / "report.csv", format_report_csv(table));
  write_file_atomic(results_dir / "convergence.csv", format_convergence_csv(results_dir, methods));
  return table;
}

}  // namespace hpfs
