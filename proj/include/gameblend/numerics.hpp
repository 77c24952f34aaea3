#pragma once

#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gameblend/random.hpp"

namespace gameblend {

enum class Activation { kIdentity, kRelu, kSoftplus };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::kIdentity;
};

// Fully-connected chain. Batches are column-major: one sample per column.
class DenseNet {
 public:
  DenseNet() = default;
  // Layer i maps widths[i-1] (or input_dim) to widths[i]. Weights are drawn
  // uniformly with fan-in scaling: He bounds for relu layers, LeCun otherwise.
  DenseNet(int input_dim, const std::vector<int>& widths,
           const std::vector<Activation>& activations, Rng& rng);

  int input_dim() const { return input_dim_; }
  int output_dim() const;
  bool empty() const { return layers_.empty(); }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t parameter_count() const;
  // Weight then bias for each layer, in layer order.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;

  bool operator==(const DenseNet& other) const;

 private:
  int input_dim_ = 0;
  std::vector<Layer> layers_;
};

struct Tape {
  std::vector<Eigen::MatrixXd> inputs;          // input to each layer
  std::vector<Eigen::MatrixXd> preactivations;  // W x + b for each layer
};

struct ForwardResult {
  Eigen::MatrixXd output;
  Tape tape;
};

struct NetGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;

  // Same order as DenseNet::parameters().
  std::vector<std::span<const double>> views() const;
};

ForwardResult forward(const DenseNet& net, const Eigen::MatrixXd& x);
Eigen::MatrixXd predict(const DenseNet& net, const Eigen::MatrixXd& x);
// Gradients of a scalar loss given dLoss/dOutput, summed over the batch.
NetGradients backward(const DenseNet& net, const Tape& tape, const Eigen::MatrixXd& grad_out);

double softplus(double x);
double sigmoid(double x);

// Adam ------------------------------------------------------------------

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One bias-corrected Adam update over a list of parameter tensors. Moments
// are allocated on the first call; later calls must present the same shapes.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);

struct PlateauDecay {
  double factor = 0.1;
  int patience = 50;
  double rel_tolerance = 1e-4;
};

struct StepDecay {
  double factor = 0.1;
  int every_n = 2500;
};

using LrPolicy = std::variant<PlateauDecay, StepDecay>;

// Applies the policy after the last epoch in `history`; returns true when the
// learning rate was decayed. Plateau state is replayed from the full history
// so the call is a pure function of its inputs.
bool schedule_lr(AdamState& state, const LrPolicy& policy, std::span<const double> history);

// Gaussians ---------------------------------------------------------------

struct DiagGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

Eigen::VectorXd sample_gaussian(const DiagGaussian& d, Rng& rng);
Eigen::MatrixXd standard_normal(int rows, int cols, Rng& rng);
// KL(q || p), summed over dimensions.
double kl_diag(const DiagGaussian& q, const DiagGaussian& p);

}  // namespace gameblend
