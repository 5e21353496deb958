#include "hpfs/mlp.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "hpfs/random.hpp"

namespace hpfs {

bool NetworkParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

void TrainConfig::validate() const {
  if (hidden_units < kMinHiddenUnits || hidden_units > kMaxHiddenUnits)
    throw std::invalid_argument("hidden units must lie in [2, 60], got " + std::to_string(hidden_units));
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
    throw std::invalid_argument("learning rate must lie in [0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
}

LabeledMatrix to_matrix(const Dataset& dataset) {
  LabeledMatrix out{Eigen::MatrixXd(dataset.size(), dataset.dimension()), {}};
  out.y.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    for (std::size_t j = 0; j < s.features.size(); ++j) out.x(i, j) = s.features[j];
    out.y.push_back(class_index(s.label));
  }
  return out;
}

TrainingDiverged::TrainingDiverged(int epoch)
    : std::runtime_error("training loss became non-finite at epoch " + std::to_string(epoch)),
      epoch_(epoch) {}

NetworkParams init_network(int input_dim, int hidden_units, int output_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_units < 1 || output_dim < 1)
    throw std::invalid_argument("network dimensions must be positive");
  Rng rng = make_rng({seed, 0x696e6974ULL});
  NetworkParams p;
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_units));
  p.w1.resize(hidden_units, input_dim);
  for (Eigen::Index i = 0; i < p.w1.rows(); ++i)
    for (Eigen::Index j = 0; j < p.w1.cols(); ++j) p.w1(i, j) = uniform(rng, -r1, r1);
  p.w2.resize(output_dim, hidden_units);
  for (Eigen::Index i = 0; i < p.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < p.w2.cols(); ++j) p.w2(i, j) = uniform(rng, -r2, r2);
  p.b1 = Eigen::VectorXd::Zero(hidden_units);
  p.b2 = Eigen::VectorXd::Zero(output_dim);
  return p;
}

namespace {

void check_input(const NetworkParams& params, Eigen::Index cols) {
  if (cols != params.w1.cols())
    throw std::invalid_argument("input dimension " + std::to_string(cols) +
                                " does not match network input " + std::to_string(params.w1.cols()));
}

void check_labels(const NetworkParams& params, const Eigen::MatrixXd& x, std::span<const int> y) {
  check_input(params, x.cols());
  if (static_cast<Eigen::Index>(y.size()) != x.rows())
    throw std::invalid_argument("label count does not match batch size");
  if (y.empty()) throw std::invalid_argument("empty batch");
  for (int c : y)
    if (c < 0 || c >= params.output_dim()) throw std::invalid_argument("label outside output range");
}

Eigen::MatrixXd hidden_activations(const NetworkParams& p, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h(x.rows(), p.w1.rows());
  h.noalias() = x * p.w1.transpose();
  h.rowwise() += p.b1.transpose();
  return (1.0 / (1.0 + (-h.array()).exp())).matrix();
}

Eigen::MatrixXd logits(const NetworkParams& p, const Eigen::MatrixXd& hidden) {
  Eigen::MatrixXd z(hidden.rows(), p.w2.rows());
  z.noalias() = hidden * p.w2.transpose();
  z.rowwise() += p.b2.transpose();
  return z;
}

// Row-wise softmax in place; returns the mean cross-entropy when labels are given.
double softmax_rows(Eigen::MatrixXd& z, std::span<const int> y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double zmax = z.row(i).maxCoeff();
    z.row(i).array() -= zmax;
    const double log_norm = std::log(z.row(i).array().exp().sum());
    if (!y.empty()) loss += log_norm - z(i, y[i]);
    z.row(i) = (z.row(i).array() - log_norm).exp().matrix();
  }
  return y.empty() ? 0.0 : loss / static_cast<double>(z.rows());
}

struct Pass {
  Eigen::MatrixXd hidden;
  Eigen::MatrixXd probs;
  double loss;
};

Pass full_pass(const NetworkParams& p, const Eigen::MatrixXd& x, std::span<const int> y) {
  Pass out;
  out.hidden = hidden_activations(p, x);
  out.probs = logits(p, out.hidden);
  out.loss = softmax_rows(out.probs, y);
  return out;
}

Gradients backward(const NetworkParams& p, const Eigen::MatrixXd& x, std::span<const int> y,
                   const Pass& pass) {
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Eigen::MatrixXd dz = pass.probs;
  for (Eigen::Index i = 0; i < dz.rows(); ++i) dz(i, y[i]) -= 1.0;
  dz *= inv_n;

  Gradients g;
  g.w2.noalias() = dz.transpose() * pass.hidden;
  g.b2 = dz.colwise().sum().transpose();
  Eigen::MatrixXd dh(dz.rows(), p.w2.cols());
  dh.noalias() = dz * p.w2;
  dh.array() *= pass.hidden.array() * (1.0 - pass.hidden.array());
  g.w1.noalias() = dh.transpose() * x;
  g.b1 = dh.colwise().sum().transpose();
  return g;
}

}  // namespace

Eigen::VectorXd forward(const NetworkParams& params, std::span<const double> x) {
  check_input(params, static_cast<Eigen::Index>(x.size()));
  Eigen::MatrixXd row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward_batch(params, row).row(0).transpose();
}

Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x) {
  check_input(params, x.cols());
  Eigen::MatrixXd z = logits(params, hidden_activations(params, x));
  softmax_rows(z, {});
  return z;
}

double mean_cross_entropy(const NetworkParams& params, const Eigen::MatrixXd& x,
                          std::span<const int> y) {
  check_labels(params, x, y);
  return full_pass(params, x, y).loss;
}

Gradients compute_gradients(const NetworkParams& params, const Eigen::MatrixXd& x,
                            std::span<const int> y) {
  check_labels(params, x, y);
  return backward(params, x, y, full_pass(params, x, y));
}

FitResult fit(const LabeledMatrix& data, const TrainConfig& config, int output_dim,
              bool record_loss) {
  config.validate();
  FitResult out;
  out.params = init_network(static_cast<int>(data.x.cols()), config.hidden_units, output_dim,
                            config.seed);
  check_labels(out.params, data.x, data.y);
  NetworkParams& p = out.params;

  Gradients step;
  step.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  step.b1 = Eigen::VectorXd::Zero(p.b1.size());
  step.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  step.b2 = Eigen::VectorXd::Zero(p.b2.size());

  const double eta = config.learning_rate, mu = config.momentum;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const Pass pass = full_pass(p, data.x, data.y);
    if (!std::isfinite(pass.loss)) {
      out.diverged_at = epoch;
      break;
    }
    if (record_loss) out.loss_history.push_back(pass.loss);
    const Gradients g = backward(p, data.x, data.y, pass);
    step.w1 = mu * step.w1 - eta * g.w1;
    step.b1 = mu * step.b1 - eta * g.b1;
    step.w2 = mu * step.w2 - eta * g.w2;
    step.b2 = mu * step.b2 - eta * g.b2;
    p.w1 += step.w1;
    p.b1 += step.b1;
    p.w2 += step.w2;
    p.b2 += step.b2;
  }
  return out;
}

NetworkParams train(const LabeledMatrix& data, const TrainConfig& config, int output_dim) {
  FitResult r = fit(data, config, output_dim);
  if (r.diverged_at) throw TrainingDiverged(*r.diverged_at);
  return std::move(r.params);
}

NetworkParams train(const Dataset& data, const TrainConfig& config) {
  return train(to_matrix(data), config, kNumClasses);
}

int argmax_lowest(std::span<const double> scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
  return argmax_lowest(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
}

ClassLabel predict(const NetworkParams& params, std::span<const double> x) {
  return label_from_index(argmax_lowest(forward(params, x)));
}

std::vector<int> predict_batch(const NetworkParams& params, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd probs = forward_batch(params, x);
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c)
      if (probs(i, c) > probs(i, best)) best = static_cast<int>(c);
    out[i] = best;
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw std::invalid_argument("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(x.rows());
    const double sd = std::sqrt(var);
    s.scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw std::invalid_argument("standardizer column mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

void write_model(const NetworkParams& params, std::ostream& out) {
  auto dump = [&out](const char* name, const Eigen::MatrixXd& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_real(m(i, j));
      out << '\n';
    }
  };
  dump("w1", params.w1);
  dump("b1", params.b1);
  dump("w2", params.w2);
  dump("b2", params.b2);
}

}  // namespace hpfs
