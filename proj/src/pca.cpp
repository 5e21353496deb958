#include "hpfs/pca.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "hpfs/mlp.hpp"

namespace hpfs {

Eigen::MatrixXd PcaProjection::project(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw std::invalid_argument("PCA projection: column mismatch");
  const Eigen::MatrixXd z = ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  return z * basis;
}

PcaProjection fit_pca(const Eigen::MatrixXd& train, double variance_threshold,
                      PcaScaling scaling) {
  if (train.rows() == 0 || train.cols() == 0) throw std::invalid_argument("PCA: empty training data");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw std::invalid_argument("PCA: variance threshold must lie in (0, 1]");

  PcaProjection out;
  out.variance_threshold = variance_threshold;
  if (scaling == PcaScaling::Standardize) {
    const auto s = Standardizer::fit(train);
    out.mean = s.mean;
    out.scale = s.scale;
  } else {
    out.mean = train.colwise().mean();
    out.scale = Eigen::RowVectorXd::Ones(train.cols());
  }
  const Eigen::MatrixXd z = ((train.rowwise() - out.mean).array().rowwise() / out.scale.array()).matrix();
  const double denom = train.rows() > 1 ? static_cast<double>(train.rows() - 1) : 1.0;
  const Eigen::MatrixXd cov = (z.transpose() * z) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const Eigen::Index m = values.size();

  const double largest = values(m - 1);
  const double floor = std::max(largest, 0.0) * 1e-10;
  std::vector<Eigen::Index> kept;  // descending order
  double total = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    if (values(i) > floor && values(i) > 0.0) {
      kept.push_back(i);
      total += values(i);
    }
  }
  out.total_variance = total;
  if (kept.empty()) throw std::invalid_argument("PCA: training data has no variance");

  double cumulative = 0.0;
  std::size_t k = 0;
  while (k < kept.size()) {
    cumulative += values(kept[k]);
    out.explained_variance.push_back(values(kept[k]));
    ++k;
    if (cumulative / total >= variance_threshold - 1e-12) break;
  }

  out.basis.resize(train.cols(), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd v = vectors.col(kept[c]);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0) v = -v;  // fixed sign for reproducible projections
    out.basis.col(static_cast<Eigen::Index>(c)) = v;
  }
  return out;
}

namespace {

Dataset to_dataset(const Eigen::MatrixXd& x, const Dataset& source) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < x.cols(); ++c) names.push_back("pc_" + std::to_string(c + 1));
  std::vector<Sample> samples(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    samples[i].label = source[i].label;
    samples[i].features.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) samples[i].features[c] = x(static_cast<Eigen::Index>(i), c);
  }
  return Dataset(std::move(samples), std::move(names));
}

}  // namespace

PcaReduction pca_reduce(const Dataset& train, const Dataset& test, double variance_threshold,
                        PcaScaling scaling) {
  if (train.dimension() != test.dimension())
    throw std::invalid_argument("PCA: train and test dimensions differ");
  const auto tr = to_matrix(train);
  const auto te = to_matrix(test);
  auto projection = fit_pca(tr.x, variance_threshold, scaling);
  Dataset reduced_train = to_dataset(projection.project(tr.x), train);
  Dataset reduced_test = to_dataset(projection.project(te.x), test);
  return {std::move(reduced_train), std::move(reduced_test), std::move(projection)};
}

}  // namespace hpfs
