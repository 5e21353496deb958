// Serial reference kernels against their OpenMP / Eigen counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "hpfs/dataset.hpp"
#include "hpfs/features.hpp"
#include "hpfs/mlp.hpp"
#include "hpfs/pipeline.hpp"
#include "hpfs/pso.hpp"
#include "hpfs/random.hpp"
#include "hpfs/serial.hpp"

using namespace hpfs;

namespace {

std::vector<GrayImage> texture_batch(int n) {
  return generate_synthetic_textures(n, 64, 7).images;
}

void BM_ExtractSerial(benchmark::State& state) {
  const auto images = texture_batch(8);
  for (auto _ : state) benchmark::DoNotOptimize(serial::extract_batch(images));
}
BENCHMARK(BM_ExtractSerial)->Unit(benchmark::kMillisecond);

void BM_ExtractParallel(benchmark::State& state) {
  const auto images = texture_batch(8);
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_batch(images, {}, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExtractParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

struct Batch {
  NetworkParams params;
  Eigen::MatrixXd x;
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
};

Batch make_batch(int n) {
  Batch b{init_network(38, 20, kNumClasses, 3), Eigen::MatrixXd(n, 38), {}, {}};
  Rng rng(5);
  b.rows.assign(n, std::vector<double>(38));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 38; ++j) b.x(i, j) = b.rows[i][j] = uniform(rng, -2, 2);
    b.y.push_back(i % kNumClasses);
  }
  return b;
}

void BM_GradientsSerial(benchmark::State& state) {
  const auto b = make_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::compute_gradients(b.params, b.rows, b.y));
}
BENCHMARK(BM_GradientsSerial)->Arg(300)->Unit(benchmark::kMicrosecond);

void BM_GradientsEigen(benchmark::State& state) {
  const auto b = make_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_gradients(b.params, b.x, b.y));
}
BENCHMARK(BM_GradientsEigen)->Arg(300)->Unit(benchmark::kMicrosecond);

// One swarm evaluation where each particle trains a small network.
struct SwarmCase {
  LabeledMatrix data;
  Swarm swarm;
  FitnessFn fitness;
};

SwarmCase make_swarm_case() {
  SwarmCase c;
  const auto b = make_batch(120);
  c.data.x = b.x;
  c.data.y = b.y;
  PsoConfig cfg;
  cfg.n_particles = 8;
  cfg.seed = 2;
  c.swarm = initialize_swarm(build_search_space(38, SearchVariant::Hyperparameters), cfg);
  c.fitness = [data = c.data](std::span<const double> x) {
    TrainConfig t{static_cast<int>(x[0]), std::max(x[1], 0.001), std::min(x[2], 0.999), 50, 1};
    return mean_cross_entropy(train(data, t, kNumClasses), data.x, data.y);
  };
  return c;
}

void BM_SwarmSerial(benchmark::State& state) {
  auto c = make_swarm_case();
  for (auto _ : state) serial::evaluate_swarm(c.swarm, c.fitness);
}
BENCHMARK(BM_SwarmSerial)->Unit(benchmark::kMillisecond);

void BM_SwarmParallel(benchmark::State& state) {
  auto c = make_swarm_case();
  for (auto _ : state) evaluate_swarm(c.swarm, c.fitness, static_cast<int>(state.range(0)));
}
BENCHMARK(BM_SwarmParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
