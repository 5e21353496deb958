#include "hpfs/serial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hpfs::serial {

void evaluate_swarm(Swarm& swarm, const FitnessFn& fitness) {
  for (auto& p : swarm.particles) {
    const double f = fitness(p.position);
    p.fitness = std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  }
}

std::vector<std::vector<double>> extract_batch(std::span<const GrayImage> images,
                                               const DescriptorConfig& config) {
  std::vector<std::vector<double>> rows;
  rows.reserve(images.size());
  for (const auto& img : images) rows.push_back(extract(img, config));
  return rows;
}

namespace {

struct Activations {
  std::vector<double> hidden;
  std::vector<double> probs;
};

Activations forward_one(const NetworkParams& p, const std::vector<double>& x) {
  const int in = p.input_dim(), h = p.hidden_units(), out = p.output_dim();
  Activations a;
  a.hidden.resize(h);
  for (int j = 0; j < h; ++j) {
    double z = p.b1(j);
    for (int i = 0; i < in; ++i) z += p.w1(j, i) * x[i];
    a.hidden[j] = 1.0 / (1.0 + std::exp(-z));
  }
  std::vector<double> logits(out);
  for (int k = 0; k < out; ++k) {
    double z = p.b2(k);
    for (int j = 0; j < h; ++j) z += p.w2(k, j) * a.hidden[j];
    logits[k] = z;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  a.probs.resize(out);
  for (int k = 0; k < out; ++k) norm += (a.probs[k] = std::exp(logits[k] - top));
  for (auto& v : a.probs) v /= norm;
  return a;
}

}  // namespace

std::vector<std::vector<double>> forward_batch(const NetworkParams& params,
                                               const std::vector<std::vector<double>>& x) {
  std::vector<std::vector<double>> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(forward_one(params, row).probs);
  return out;
}

double mean_cross_entropy(const NetworkParams& params, const std::vector<std::vector<double>>& x,
                          std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) loss -= std::log(forward_one(params, x[n]).probs[y[n]]);
  return loss / static_cast<double>(x.size());
}

Gradients compute_gradients(const NetworkParams& params, const std::vector<std::vector<double>>& x,
                            std::span<const int> y) {
  const int in = params.input_dim(), h = params.hidden_units(), out = params.output_dim();
  Gradients g;
  g.w1 = Eigen::MatrixXd::Zero(h, in);
  g.b1 = Eigen::VectorXd::Zero(h);
  g.w2 = Eigen::MatrixXd::Zero(out, h);
  g.b2 = Eigen::VectorXd::Zero(out);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto a = forward_one(params, x[n]);
    std::vector<double> delta_out(out);
    for (int k = 0; k < out; ++k) delta_out[k] = a.probs[k] - (k == y[n] ? 1.0 : 0.0);
    for (int k = 0; k < out; ++k) {
      g.b2(k) += scale * delta_out[k];
      for (int j = 0; j < h; ++j) g.w2(k, j) += scale * delta_out[k] * a.hidden[j];
    }
    for (int j = 0; j < h; ++j) {
      double back = 0.0;
      for (int k = 0; k < out; ++k) back += params.w2(k, j) * delta_out[k];
      const double delta = back * a.hidden[j] * (1.0 - a.hidden[j]);
      g.b1(j) += scale * delta;
      for (int i = 0; i < in; ++i) g.w1(j, i) += scale * delta * x[n][i];
    }
  }
  return g;
}

}  // namespace hpfs::serial
