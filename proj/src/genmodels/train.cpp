#include <algorithm>
#include <cmath>
#include <numeric>

#include "gameblend/errors.hpp"
#include "gameblend/genmodels.hpp"

namespace gameblend {

ModelCheckpoint train_model(const Corpus& corpus, const ModelConfig& config,
                            const TrainObserver& observer) {
  ModelCheckpoint model = init_model(config, corpus.vocab);
  const auto& segments = corpus.segments;
  if (segments.empty()) throw EmptySet("corpus has no segments");
  if (is_directional(config.family)) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (!segments[i].dir) throw MissingDirectionalLabel(static_cast<int>(i));
    }
  }

  Rng rng = derive_rng(config.seed, 1);
  AdamState adam;
  adam.learning_rate = config.learning_rate;
  const bool annealed = !uses_mixture_prior(config.family);

  std::vector<int> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double beta = annealed ? kl_weight(epoch, config.kl_anneal_epochs) : 1.0;
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const std::span<const int> indices(order.data() + start, stop - start);
      const Batch batch = make_batch(segments, indices, model);
      const Eigen::MatrixXd noise = standard_normal(config.z, batch.size(), rng);
      const LossResult result = elbo_loss(model, batch, noise, beta);
      if (!std::isfinite(result.loss)) throw NonFiniteLoss(epoch);
      epoch_loss += result.loss * static_cast<double>(batch.size());

      std::vector<std::span<double>> params;
      for (DenseNet* net : model.nets()) {
        auto p = net->parameters();
        params.insert(params.end(), p.begin(), p.end());
      }
      const auto grads = result.grads.views();
      adam_step(params, grads, adam);
    }
    epoch_loss /= static_cast<double>(segments.size());
    model.loss_history.push_back(epoch_loss);
    if (observer.on_epoch) observer.on_epoch(epoch, epoch_loss, adam.learning_rate);
    schedule_lr(adam, config.lr_policy, model.loss_history);
  }

  if (uses_mixture_prior(config.family)) model.components = model.evaluate_components();
  return model;
}

ModelCheckpoint train_gmvae(const Corpus& corpus, const ModelConfig& config,
                            const TrainObserver& observer) {
  if (config.family != Family::kGmvae) throw FamilyMismatch("train_gmvae needs family gmvae");
  return train_model(corpus, config, observer);
}

ModelCheckpoint train_cvae(const Corpus& corpus, const ModelConfig& config,
                           const TrainObserver& observer) {
  if (config.family != Family::kCvae) throw FamilyMismatch("train_cvae needs family cvae");
  return train_model(corpus, config, observer);
}

ModelCheckpoint train_conditional_directional(const Corpus& corpus, const ModelConfig& config,
                                              const TrainObserver& observer) {
  if (!is_directional(config.family)) {
    throw FamilyMismatch("directional training needs family cgmvae or ccvae");
  }
  return train_model(corpus, config, observer);
}

}  // namespace gameblend
