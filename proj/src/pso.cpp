#include "hpfs/pso.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <omp.h>

#include "hpfs/dataset.hpp"

namespace hpfs {

namespace {

constexpr std::uint64_t kInitStream = 0x70736f2d696e6974ULL;
constexpr std::uint64_t kMoveStream = 0x70736f2d6d6f7665ULL;
constexpr std::uint64_t kRandomStream = 0x72732d73616d706cULL;

double sanitize(double f) { return std::isfinite(f) ? f : std::numeric_limits<double>::infinity(); }

}  // namespace

DimensionSpec DimensionSpec::continuous(double lower, double upper) {
  return {DimensionKind::Continuous, lower, upper, upper};
}

DimensionSpec DimensionSpec::integer(double lower, double upper) {
  return {DimensionKind::Integer, lower, upper, upper};
}

DimensionSpec DimensionSpec::binary(double vmax) { return {DimensionKind::Binary, 0.0, 1.0, vmax}; }

bool DimensionSpec::contains(double x) const {
  if (kind == DimensionKind::Binary) return x == 0.0 || x == 1.0;
  return x >= lower && x <= upper;
}

void SearchSpace::validate() const {
  if (dims.empty()) throw std::invalid_argument("search space has no dimensions");
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto& s = dims[d];
    if (!(s.vmax > 0.0))
      throw std::invalid_argument("dimension " + std::to_string(d) + ": vmax must be positive");
    if (s.kind != DimensionKind::Binary && !(s.lower < s.upper))
      throw std::invalid_argument("dimension " + std::to_string(d) + ": lower must be below upper");
  }
}

bool SearchSpace::contains(std::span<const double> position) const {
  if (position.size() != dims.size()) return false;
  for (std::size_t d = 0; d < dims.size(); ++d)
    if (!dims[d].contains(position[d])) return false;
  return true;
}

void PsoConfig::validate() const {
  if (n_particles < 1) throw std::invalid_argument("PSO needs at least one particle");
  if (max_iterations < 1) throw std::invalid_argument("PSO needs at least one iteration");
  if (!std::isfinite(inertia) || !std::isfinite(c1) || !std::isfinite(c2))
    throw std::invalid_argument("PSO coefficients must be finite");
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<double> sample_position(const SearchSpace& space, Rng& rng) {
  std::vector<double> x(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const auto& s = space.dims[d];
    x[d] = s.kind == DimensionKind::Binary ? (uniform01(rng) < 0.5 ? 1.0 : 0.0)
                                           : uniform(rng, s.lower, s.upper);
  }
  return x;
}

Swarm initialize_swarm(const SearchSpace& space, const PsoConfig& config) {
  space.validate();
  config.validate();
  Swarm swarm;
  swarm.particles.resize(config.n_particles);
  for (int i = 0; i < config.n_particles; ++i) {
    Rng rng = make_rng({config.seed, kInitStream, static_cast<std::uint64_t>(i)});
    Particle& p = swarm.particles[i];
    p.position = sample_position(space, rng);
    p.velocity.resize(space.size());
    for (std::size_t d = 0; d < space.size(); ++d)
      p.velocity[d] = uniform(rng, -space.dims[d].vmax, space.dims[d].vmax);
    p.best_position = p.position;
  }
  return swarm;
}

double velocity_component(double v, double x, double personal_best, double global_best,
                          double r1, double r2, const PsoConfig& config, double vmax) {
  const double next = config.inertia * v + config.c1 * r1 * (personal_best - x) +
                      config.c2 * r2 * (global_best - x);
  return std::clamp(next, -vmax, vmax);
}

std::vector<double> update_velocity(const Particle& particle,
                                    std::span<const double> global_best,
                                    const SearchSpace& space, const PsoConfig& config,
                                    std::span<const double> r1, std::span<const double> r2) {
  const std::size_t n = space.size();
  if (particle.velocity.size() != n || global_best.size() != n || r1.size() != n || r2.size() != n)
    throw std::invalid_argument("update_velocity: dimension mismatch");
  std::vector<double> v(n);
  for (std::size_t d = 0; d < n; ++d)
    v[d] = velocity_component(particle.velocity[d], particle.position[d],
                              particle.best_position[d], global_best[d], r1[d], r2[d], config,
                              space.dims[d].vmax);
  return v;
}

std::vector<double> update_position(const Particle& particle, const SearchSpace& space,
                                    std::span<const double> r3) {
  const std::size_t n = space.size();
  if (particle.position.size() != n || particle.velocity.size() != n || r3.size() != n)
    throw std::invalid_argument("update_position: dimension mismatch");
  std::vector<double> x(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto& s = space.dims[d];
    if (s.kind == DimensionKind::Binary) {
      x[d] = logistic(particle.velocity[d]) > r3[d] ? 1.0 : 0.0;
    } else {
      x[d] = std::clamp(particle.position[d] + particle.velocity[d], s.lower, s.upper);
    }
  }
  return x;
}

void evaluate_swarm(Swarm& swarm, const FitnessFn& fitness, int threads) {
  const int n = static_cast<int>(swarm.particles.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (int i = 0; i < n; ++i) {
    try {
      swarm.particles[i].fitness = sanitize(fitness(swarm.particles[i].position));
    } catch (...) {
#pragma omp critical(hpfs_fitness_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

// Barrier step: fold the freshly evaluated fitnesses into personal and global
// bests in particle order, then append the trace record.
void absorb_iteration(Swarm& swarm, int iteration, ConvergenceTrace& trace) {
  double sum = 0.0;
  int finite = 0;
  for (auto& p : swarm.particles) {
    if (std::isfinite(p.fitness)) {
      sum += p.fitness;
      ++finite;
    }
    if (p.fitness < p.best_fitness) {
      p.best_fitness = p.fitness;
      p.best_position = p.position;
    }
    if (p.best_fitness < swarm.global_best_fitness || swarm.global_best_position.empty()) {
      swarm.global_best_fitness = p.best_fitness;
      swarm.global_best_position = p.best_position;
    }
  }
  trace.push_back({iteration, swarm.global_best_fitness,
                   finite ? sum / finite : std::numeric_limits<double>::infinity()});
}

}  // namespace

OptimizeResult optimize(const FitnessFn& fitness, const SearchSpace& space,
                        const PsoConfig& config, const SwarmObserver& observer) {
  Swarm swarm = initialize_swarm(space, config);
  OptimizeResult result;
  const std::size_t n = space.size();

  evaluate_swarm(swarm, fitness, config.threads);
  result.evaluations += config.n_particles;
  absorb_iteration(swarm, 1, result.trace);
  if (observer) observer(1, swarm);

  std::vector<double> r1(n), r2(n), r3(n);
  for (int t = 2; t <= config.max_iterations; ++t) {
    for (int i = 0; i < config.n_particles; ++i) {
      Rng rng = make_rng({config.seed, kMoveStream, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(t)});
      for (std::size_t d = 0; d < n; ++d) {
        r1[d] = uniform01(rng);
        r2[d] = uniform01(rng);
      }
      for (std::size_t d = 0; d < n; ++d) r3[d] = uniform01(rng);
      Particle& p = swarm.particles[i];
      p.velocity = update_velocity(p, swarm.global_best_position, space, config, r1, r2);
      p.position = update_position(p, space, r3);
    }
    evaluate_swarm(swarm, fitness, config.threads);
    result.evaluations += config.n_particles;
    absorb_iteration(swarm, t, result.trace);
    if (observer) observer(t, swarm);
  }

  result.best_position = swarm.global_best_position;
  result.best_fitness = swarm.global_best_fitness;
  return result;
}

OptimizeResult random_search(const FitnessFn& fitness, const SearchSpace& space,
                             const PsoConfig& config) {
  space.validate();
  config.validate();
  OptimizeResult result;
  std::vector<std::vector<double>> batch(config.n_particles);
  std::vector<double> scores(config.n_particles);
  const int threads = std::max(1, config.threads);

  for (int t = 1; t <= config.max_iterations; ++t) {
    for (int i = 0; i < config.n_particles; ++i) {
      Rng rng = make_rng({config.seed, kRandomStream, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(t)});
      batch[i] = sample_position(space, rng);
    }
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < config.n_particles; ++i) {
      try {
        scores[i] = sanitize(fitness(batch[i]));
      } catch (...) {
#pragma omp critical(hpfs_fitness_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    result.evaluations += config.n_particles;

    double sum = 0.0;
    int finite = 0;
    for (int i = 0; i < config.n_particles; ++i) {
      if (std::isfinite(scores[i])) {
        sum += scores[i];
        ++finite;
      }
      if (scores[i] < result.best_fitness || result.best_position.empty()) {
        result.best_fitness = scores[i];
        result.best_position = batch[i];
      }
    }
    result.trace.push_back({t, result.best_fitness,
                            finite ? sum / finite : std::numeric_limits<double>::infinity()});
  }
  return result;
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  out << "iteration,best_fitness,mean_fitness\n";
  for (const auto& r : trace)
    out << r.iteration << ',' << format_real(r.best_fitness) << ',' << format_real(r.mean_fitness)
        << '\n';
}

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,best_fitness,mean_fitness", 0) != 0)
    throw std::runtime_error("trace CSV: unexpected header");
  ConvergenceTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRecord r;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("trace CSV: malformed row '" + line + "'");
    r.iteration = std::stoi(line.substr(0, c1));
    r.best_fitness = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    r.mean_fitness = std::stod(line.substr(c2 + 1));
    trace.push_back(r);
  }
  return trace;
}

}  // namespace hpfs
