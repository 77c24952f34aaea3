#include <cmath>
#include <limits>

#include "gameblend/errors.hpp"
#include "gameblend/numerics.hpp"

namespace gameblend {

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size()) throw DimMismatch("parameter/gradient count mismatch");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw DimMismatch("Adam state shape mismatch");

  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    if (p.size() != g.size() || p.size() != m.size()) throw DimMismatch("Adam tensor shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

namespace {

bool plateau_decays_at_end(const PlateauDecay& policy, std::span<const double> history) {
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  bool decayed = false;
  for (double loss : history) {
    decayed = false;
    if (loss < best * (1.0 - policy.rel_tolerance) || std::isinf(best)) {
      best = loss;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    if (bad_epochs >= policy.patience) {
      decayed = true;
      bad_epochs = 0;
    }
  }
  return decayed;
}

}  // namespace

bool schedule_lr(AdamState& state, const LrPolicy& policy, std::span<const double> history) {
  if (history.empty()) return false;
  bool decay = false;
  double factor = 1.0;
  if (const auto* plateau = std::get_if<PlateauDecay>(&policy)) {
    decay = plateau_decays_at_end(*plateau, history);
    factor = plateau->factor;
  } else {
    const auto& step = std::get<StepDecay>(policy);
    decay = step.every_n > 0 && history.size() % static_cast<std::size_t>(step.every_n) == 0;
    factor = step.factor;
  }
  if (decay) state.learning_rate *= factor;
  return decay;
}

Eigen::MatrixXd standard_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = n(rng);
  }
  return out;
}

Eigen::VectorXd sample_gaussian(const DiagGaussian& d, Rng& rng) {
  if (d.mean.size() != d.var.size()) throw DimMismatch("mean/variance length mismatch");
  if ((d.var.array() <= 0.0).any()) throw NonPositiveVariance("variance must be positive");
  const Eigen::MatrixXd eps = standard_normal(static_cast<int>(d.mean.size()), 1, rng);
  return d.mean + (d.var.array().sqrt() * eps.col(0).array()).matrix();
}

double kl_diag(const DiagGaussian& q, const DiagGaussian& p) {
  if (q.mean.size() != p.mean.size() || q.var.size() != p.var.size()) {
    throw DimMismatch("KL operands differ in dimension");
  }
  if ((q.var.array() <= 0.0).any() || (p.var.array() <= 0.0).any()) {
    throw NonPositiveVariance("variance must be positive");
  }
  const auto diff = (q.mean - p.mean).array();
  const auto terms = (p.var.array() / q.var.array()).log() +
                     (q.var.array() + diff.square()) / p.var.array() - 1.0;
  return 0.5 * terms.sum();
}

}  // namespace gameblend
