#pragma once

// Single-threaded, loop-level versions of the parallel kernels. Kept for
// cross-checking the OpenMP and Eigen paths in tests and benchmarks.

#include <span>
#include <vector>

#include "hpfs/features.hpp"
#include "hpfs/image.hpp"
#include "hpfs/mlp.hpp"
#include "hpfs/pso.hpp"

namespace hpfs::serial {

void evaluate_swarm(Swarm& swarm, const FitnessFn& fitness);

std::vector<std::vector<double>> extract_batch(std::span<const GrayImage> images,
                                               const DescriptorConfig& config = {});

// Row-major, one sample at a time, no Eigen expressions.
std::vector<std::vector<double>> forward_batch(const NetworkParams& params,
                                               const std::vector<std::vector<double>>& x);

double mean_cross_entropy(const NetworkParams& params, const std::vector<std::vector<double>>& x,
                          std::span<const int> y);

Gradients compute_gradients(const NetworkParams& params, const std::vector<std::vector<double>>& x,
                            std::span<const int> y);

}  // namespace hpfs::serial
