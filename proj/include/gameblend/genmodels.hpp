#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/corpus.hpp"
#include "gameblend/numerics.hpp"

namespace gameblend {

enum class Family { kGmvae, kCvae, kCgmvae, kCcvae };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

// GM families learn one latent Gaussian per game; conditional families use a
// standard normal prior and feed labels to encoder and decoder.
bool uses_mixture_prior(Family f);
bool is_directional(Family f);

struct ModelConfig {
  Family family = Family::kGmvae;
  int k = 4;
  int z = 32;
  int epochs = 1000;
  double learning_rate = 1e-3;
  LrPolicy lr_policy = PlateauDecay{};
  int kl_anneal_epochs = 2500;  // conditional families only
  std::uint64_t seed = 0;
  std::vector<int> encoder_hidden = {512, 256, 128};
  std::vector<int> decoder_hidden = {128, 256};
  int batch_size = 32;

  // Full-size schedule for the family: GM families train 1000 epochs with
  // plateau decay, conditional ones 10000 epochs with step decay and a KL
  // anneal over the first 2500.
  static ModelConfig defaults(Family family, int k, int z);

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Label widths concatenated to encoder input and decoder latent.
struct LabelLayout {
  int game_bits = 0;
  int dir_bits = 0;
  int width() const { return game_bits + dir_bits; }
};

LabelLayout label_layout(const ModelConfig& config);

struct ComponentSet {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> vars;

  DiagGaussian component(int i) const;
  int size() const { return static_cast<int>(means.size()); }
};

inline constexpr double kVarianceFloor = 1e-6;

struct ModelCheckpoint {
  ModelConfig config;
  TileVocab vocab;
  DenseNet encoder;    // trunk
  DenseNet mean_head;
  DenseNet var_head;   // softplus output; variance = output + kVarianceFloor
  DenseNet decoder;    // logits, vocab-size block per cell
  DenseNet prior_mean; // GM families only
  DenseNet prior_var;
  std::optional<ComponentSet> components;
  std::vector<double> loss_history;
  nlohmann::json provenance = nlohmann::json::object();  // config hash, seed, tool version

  LabelLayout labels() const { return label_layout(config); }
  int vocab_size() const { return static_cast<int>(vocab.size()); }
  int input_dim() const { return kSegmentCells * vocab_size(); }

  // Fixed order shared by gradients and the optimizer.
  std::vector<DenseNet*> nets();
  std::vector<const DenseNet*> nets() const;

  // Prior net applied to each one-hot game label.
  ComponentSet evaluate_components() const;
};

// Freshly initialized networks for the config and vocabulary.
ModelCheckpoint init_model(const ModelConfig& config, const TileVocab& vocab);

struct Batch {
  Eigen::MatrixXd x;       // one-hot segments, one column per sample
  Eigen::MatrixXd games;   // k x B one-hot game labels
  Eigen::MatrixXd dirs;    // 4 x B directional labels, or 0 x B
  std::vector<TileId> targets;  // B * 240 tile ids
  int size() const { return static_cast<int>(x.cols()); }
};

// Labels required by the family must be present on every segment.
Batch make_batch(const std::vector<Segment>& segments, std::span<const int> indices,
                 const ModelCheckpoint& model);

struct ModelGradients {
  std::vector<NetGradients> nets;  // same order as ModelCheckpoint::nets()
  std::vector<std::span<const double>> views() const;
};

struct LossResult {
  double loss = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  ModelGradients grads;
};

// Mean over the batch of per-cell cross-entropy plus beta * KL(q(z|x) || prior)
// where the prior is the game's mixture component (GM families) or N(0, I).
// `noise` is the reparameterization draw (z x B).
LossResult elbo_loss(const ModelCheckpoint& model, const Batch& batch, const Eigen::MatrixXd& noise,
                     double beta);
LossResult gmvae_loss(const ModelCheckpoint& model, const Batch& batch,
                      const Eigen::MatrixXd& noise);
LossResult cvae_loss(const ModelCheckpoint& model, const Batch& batch, const Eigen::MatrixXd& noise,
                     double beta);

// Linear anneal from 0 at epoch 0 to 1 at `span` epochs.
double kl_weight(int epoch, int span);

// Categorical cross-entropy of per-cell logits against target tile ids; the
// gradient (softmax - one-hot) is written to `grad` when non-null.
double reconstruction_loss(const Eigen::MatrixXd& logits, std::span<const TileId> targets,
                           int vocab_size, Eigen::MatrixXd* grad);

struct TrainObserver {
  std::function<void(int epoch, double loss, double learning_rate)> on_epoch;
};

ModelCheckpoint train_model(const Corpus& corpus, const ModelConfig& config,
                            const TrainObserver& observer = {});
ModelCheckpoint train_gmvae(const Corpus& corpus, const ModelConfig& config,
                            const TrainObserver& observer = {});
ModelCheckpoint train_cvae(const Corpus& corpus, const ModelConfig& config,
                           const TrainObserver& observer = {});
// CGMVAE and CCVAE; every segment needs a directional label.
ModelCheckpoint train_conditional_directional(const Corpus& corpus, const ModelConfig& config,
                                              const TrainObserver& observer = {});

// Encoder posterior for each segment.
std::vector<DiagGaussian> encode(const ModelCheckpoint& model, const std::vector<Segment>& segments);
// Decoder logits for latents (z x B) with labels (label width x B).
Eigen::MatrixXd decode_logits(const ModelCheckpoint& model, const Eigen::MatrixXd& latents,
                              const Eigen::MatrixXd& labels);

// Checkpoint files --------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelCheckpoint& model, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
std::string serialize_checkpoint(const ModelCheckpoint& model);
ModelCheckpoint deserialize_checkpoint(std::string_view bytes);

}  // namespace gameblend
