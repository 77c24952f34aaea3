#include <cmath>

#include "gameblend/errors.hpp"
#include "gameblend/numerics.hpp"

namespace gameblend {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation a) {
  switch (a) {
    case Activation::kRelu: return pre.cwiseMax(0.0);
    case Activation::kSoftplus: return pre.unaryExpr([](double x) { return softplus(x); });
    case Activation::kIdentity: break;
  }
  return pre;
}

Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& upstream,
                                Activation a) {
  switch (a) {
    case Activation::kRelu:
      return upstream.cwiseProduct(pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
    case Activation::kSoftplus:
      return upstream.cwiseProduct(pre.unaryExpr([](double x) { return sigmoid(x); }));
    case Activation::kIdentity: break;
  }
  return upstream;
}

}  // namespace

DenseNet::DenseNet(int input_dim, const std::vector<int>& widths,
                   const std::vector<Activation>& activations, Rng& rng)
    : input_dim_(input_dim) {
  if (widths.size() != activations.size()) throw DimMismatch("one activation per layer");
  int fan_in = input_dim;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    Layer layer;
    layer.activation = activations[i];
    const double bound = std::sqrt((activations[i] == Activation::kRelu ? 6.0 : 3.0) / fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    layer.weight.resize(widths[i], fan_in);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
    }
    layer.bias = Eigen::VectorXd::Zero(widths[i]);
    layers_.push_back(std::move(layer));
    fan_in = widths[i];
  }
}

int DenseNet::output_dim() const {
  return layers_.empty() ? input_dim_ : static_cast<int>(layers_.back().weight.rows());
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<std::span<double>> DenseNet::parameters() {
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> DenseNet::parameters() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

std::vector<std::span<const double>> NetGradients::views() const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.emplace_back(weight[i].data(), static_cast<std::size_t>(weight[i].size()));
    out.emplace_back(bias[i].data(), static_cast<std::size_t>(bias[i].size()));
  }
  return out;
}

ForwardResult forward(const DenseNet& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_dim()) {
    throw DimMismatch("net expects " + std::to_string(net.input_dim()) + " inputs, got " +
                      std::to_string(x.rows()));
  }
  ForwardResult result;
  Eigen::MatrixXd current = x;
  for (const auto& layer : net.layers()) {
    Eigen::MatrixXd pre = layer.weight * current;
    pre.colwise() += layer.bias;
    result.tape.inputs.push_back(std::move(current));
    current = activate(pre, layer.activation);
    result.tape.preactivations.push_back(std::move(pre));
  }
  result.output = std::move(current);
  return result;
}

Eigen::MatrixXd predict(const DenseNet& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_dim()) throw DimMismatch("net input dimension mismatch");
  Eigen::MatrixXd current = x;
  for (const auto& layer : net.layers()) {
    Eigen::MatrixXd pre = layer.weight * current;
    pre.colwise() += layer.bias;
    current = activate(pre, layer.activation);
  }
  return current;
}

NetGradients backward(const DenseNet& net, const Tape& tape, const Eigen::MatrixXd& grad_out) {
  const auto& layers = net.layers();
  if (tape.inputs.size() != layers.size()) throw DimMismatch("tape does not match net");
  NetGradients g;
  g.weight.resize(layers.size());
  g.bias.resize(layers.size());
  Eigen::MatrixXd upstream = grad_out;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Eigen::MatrixXd dpre =
        activation_grad(tape.preactivations[i], upstream, layers[i].activation);
    g.weight[i].noalias() = dpre * tape.inputs[i].transpose();
    g.bias[i] = dpre.rowwise().sum();
    upstream.noalias() = layers[i].weight.transpose() * dpre;
  }
  g.input = std::move(upstream);
  return g;
}

}  // namespace gameblend
