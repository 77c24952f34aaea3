#pragma once

// Finite-difference oracle for the model losses. Independent of the manual
// backward pass: it only calls elbo_loss for the scalar value.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gameblend/genmodels.hpp"

namespace oracle {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-5});
}

// Fourth-order central difference on up to `per_tensor` random entries of
// every parameter tensor (all entries when the tensor is smaller).
inline GradCheck check_model_gradients(gameblend::ModelCheckpoint model,
                                       const gameblend::Batch& batch,
                                       const Eigen::MatrixXd& noise, double beta,
                                       std::size_t per_tensor, std::uint64_t seed) {
  using namespace gameblend;
  const LossResult analytic = elbo_loss(model, batch, noise, beta);
  const auto grads = analytic.grads.views();
  std::vector<std::span<double>> params;
  for (DenseNet* net : model.nets()) {
    auto p = net->parameters();
    params.insert(params.end(), p.begin(), p.end());
  }
  GradCheck out;
  if (params.size() != grads.size()) {
    out.max_rel_error = INFINITY;
    return out;
  }
  Rng rng(seed);
  const double h = 1e-4;
  auto loss_at = [&](std::span<double> p, std::size_t i, double x) {
    const double keep = p[i];
    p[i] = x;
    const double l = elbo_loss(model, batch, noise, beta).loss;
    p[i] = keep;
    return l;
  };
  for (std::size_t t = 0; t < params.size(); ++t) {
    std::vector<std::size_t> idx(params[t].size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    if (idx.size() > per_tensor) idx.resize(per_tensor);
    for (std::size_t i : idx) {
      const double x = params[t][i];
      const double numeric = (-loss_at(params[t], i, x + 2 * h) + 8 * loss_at(params[t], i, x + h) -
                              8 * loss_at(params[t], i, x - h) + loss_at(params[t], i, x - 2 * h)) /
                             (12 * h);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(grads[t][i], numeric));
      ++out.checked;
    }
  }
  return out;
}

}  // namespace oracle
