#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hpfs/dataset.hpp"

namespace hpfs {

// One hidden layer: logistic hidden units, softmax outputs.
struct NetworkParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;  // output

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_units() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
  bool all_finite() const;

  bool operator==(const NetworkParams& o) const {
    return w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
  }
};

// Gradients share the parameter layout.
using Gradients = NetworkParams;

inline constexpr int kMinHiddenUnits = 2;
inline constexpr int kMaxHiddenUnits = 60;

struct TrainConfig {
  int hidden_units = 20;
  double learning_rate = 0.3;
  double momentum = 0.2;
  int epochs = 500;
  std::uint64_t seed = 0;

  // gamma in [2, 60], eta in [0, 1], mu in [0, 1), epochs > 0. eta = 0 is
  // accepted and leaves the initial weights untouched.
  void validate() const;
};

// Rows are samples; labels are class indices in [0, output_dim).
struct LabeledMatrix {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

LabeledMatrix to_matrix(const Dataset& dataset);

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(int epoch);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

NetworkParams init_network(int input_dim, int hidden_units, int output_dim, std::uint64_t seed);

Eigen::VectorXd forward(const NetworkParams& params, std::span<const double> x);
// n x output_dim class probabilities.
Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x);

// Mean cross-entropy over the batch.
double mean_cross_entropy(const NetworkParams& params, const Eigen::MatrixXd& x,
                          std::span<const int> y);

// Exact gradients of the mean cross-entropy.
Gradients compute_gradients(const NetworkParams& params, const Eigen::MatrixXd& x,
                            std::span<const int> y);

struct FitResult {
  NetworkParams params;
  std::optional<int> diverged_at;  // 1-based epoch with a non-finite loss
  std::vector<double> loss_history;
};

// Full-batch gradient descent with momentum:
//   delta(t) = -eta * grad + mu * delta(t-1);  theta += delta(t).
// Stops at the first epoch whose loss is non-finite.
FitResult fit(const LabeledMatrix& data, const TrainConfig& config,
              int output_dim = kNumClasses, bool record_loss = false);

// As fit(), but throws TrainingDiverged instead of reporting it.
NetworkParams train(const LabeledMatrix& data, const TrainConfig& config,
                    int output_dim = kNumClasses);
NetworkParams train(const Dataset& data, const TrainConfig& config);

// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(std::span<const double> scores);
int argmax_lowest(const Eigen::VectorXd& scores);

ClassLabel predict(const NetworkParams& params, std::span<const double> x);
std::vector<int> predict_batch(const NetworkParams& params, const Eigen::MatrixXd& x);

// Per-column z-scoring with statistics from one matrix. Zero-variance columns
// are centered only.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

// Debug dump: shapes followed by row-major values.
void write_model(const NetworkParams& params, std::ostream& out);

}  // namespace hpfs
