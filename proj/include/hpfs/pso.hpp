#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "hpfs/random.hpp"

namespace hpfs {

enum class DimensionKind { Continuous, Integer, Binary };

inline constexpr double kBinaryVmax = 4.0;

struct DimensionSpec {
  DimensionKind kind = DimensionKind::Continuous;
  double lower = 0.0;  // ignored for binary dims
  double upper = 1.0;
  double vmax = 1.0;

  // vmax defaults to the upper bound of the range.
  static DimensionSpec continuous(double lower, double upper);
  static DimensionSpec integer(double lower, double upper);
  static DimensionSpec binary(double vmax = kBinaryVmax);

  bool contains(double x) const;
};

struct SearchSpace {
  std::vector<DimensionSpec> dims;

  std::size_t size() const { return dims.size(); }
  void validate() const;
  bool contains(std::span<const double> position) const;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  double fitness = std::numeric_limits<double>::infinity();  // at `position`
};

struct PsoConfig {
  int n_particles = 30;
  double inertia = 0.729;
  double c1 = 1.494;  // cognitive acceleration
  double c2 = 1.494;  // social acceleration
  int max_iterations = 300;
  std::uint64_t seed = 0;
  int threads = 1;  // fitness evaluations in flight; results do not depend on it

  void validate() const;
};

struct Swarm {
  std::vector<Particle> particles;
  std::vector<double> global_best_position;
  double global_best_fitness = std::numeric_limits<double>::infinity();
};

struct TraceRecord {
  int iteration = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

using ConvergenceTrace = std::vector<TraceRecord>;

// Minimized. Must be safe to call concurrently. Non-finite results are treated
// as +infinity.
using FitnessFn = std::function<double(std::span<const double>)>;

// Positions uniform within bounds (binary dims Bernoulli(0.5)), velocities
// uniform in [-vmax, vmax], personal bests at the initial positions. Fitness is
// not evaluated here.
Swarm initialize_swarm(const SearchSpace& space, const PsoConfig& config);

// v' = inertia*v + c1*r1*(p_i - x) + c2*r2*(p_g - x), clamped to [-vmax, vmax].
double velocity_component(double v, double x, double personal_best, double global_best,
                          double r1, double r2, const PsoConfig& config, double vmax);

std::vector<double> update_velocity(const Particle& particle,
                                    std::span<const double> global_best,
                                    const SearchSpace& space, const PsoConfig& config,
                                    std::span<const double> r1, std::span<const double> r2);

// Continuous/integer dims move by the velocity and are clipped to bounds
// (velocity untouched). Binary dims become 1 when logistic(v) > r3, with one
// r3 per dimension (entries for non-binary dims are ignored).
std::vector<double> update_position(const Particle& particle, const SearchSpace& space,
                                    std::span<const double> r3);

double logistic(double v);

// Evaluates every particle's current position. Parallel across particles.
void evaluate_swarm(Swarm& swarm, const FitnessFn& fitness, int threads);

struct OptimizeResult {
  std::vector<double> best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  ConvergenceTrace trace;
  long long evaluations = 0;
};

using SwarmObserver = std::function<void(int iteration, const Swarm&)>;

// Global-best PSO with synchronous updates. Iteration 1 evaluates the initial
// swarm; each later iteration moves every particle then evaluates it, so the
// run costs exactly n_particles * max_iterations fitness calls. Random draws
// come from per-(particle, iteration) substreams of config.seed.
OptimizeResult optimize(const FitnessFn& fitness, const SearchSpace& space,
                        const PsoConfig& config, const SwarmObserver& observer = {});

// Uniform sampling of the space with the same budget as optimize(): batches of
// n_particles candidates for max_iterations rounds. The trace keeps the
// best-so-far fitness and each batch's mean.
OptimizeResult random_search(const FitnessFn& fitness, const SearchSpace& space,
                             const PsoConfig& config);

std::vector<double> sample_position(const SearchSpace& space, Rng& rng);

// CSV with header `iteration,best_fitness,mean_fitness`.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
ConvergenceTrace read_trace_csv(std::istream& in);

}  // namespace hpfs
