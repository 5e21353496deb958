#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hpfs/dataset.hpp"

namespace hpfs {

enum class PcaScaling { Standardize, CenterOnly };

inline constexpr double kDefaultPcaVariance = 0.95;

// Train-fitted linear projection onto the leading principal components.
struct PcaProjection {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  Eigen::MatrixXd basis;                    // input_dim x components
  std::vector<double> explained_variance;   // retained eigenvalues, descending
  double total_variance = 0.0;              // over all non-degenerate directions
  double variance_threshold = kDefaultPcaVariance;

  int components() const { return static_cast<int>(basis.cols()); }
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
};

// Keeps the fewest components whose cumulative explained variance reaches
// `variance_threshold`. Directions with (numerically) zero variance are never
// counted, so rank-deficient data yields at most rank components.
PcaProjection fit_pca(const Eigen::MatrixXd& train, double variance_threshold,
                      PcaScaling scaling = PcaScaling::Standardize);

struct PcaReduction {
  Dataset train;
  Dataset test;
  PcaProjection projection;
};

PcaReduction pca_reduce(const Dataset& train, const Dataset& test, double variance_threshold,
                        PcaScaling scaling = PcaScaling::Standardize);

}  // namespace hpfs
