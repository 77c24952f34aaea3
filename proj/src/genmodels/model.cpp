#include <cmath>

#include "gameblend/errors.hpp"
#include "gameblend/genmodels.hpp"

namespace gameblend {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kGmvae: return "gmvae";
    case Family::kCvae: return "cvae";
    case Family::kCgmvae: return "cgmvae";
    case Family::kCcvae: return "ccvae";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  for (Family f : {Family::kGmvae, Family::kCvae, Family::kCgmvae, Family::kCcvae}) {
    if (s == to_string(f)) return f;
  }
  throw UsageError("unknown model family '" + std::string(s) + "'");
}

bool uses_mixture_prior(Family f) { return f == Family::kGmvae || f == Family::kCgmvae; }
bool is_directional(Family f) { return f == Family::kCgmvae || f == Family::kCcvae; }

ModelConfig ModelConfig::defaults(Family family, int k, int z) {
  ModelConfig c;
  c.family = family;
  c.k = k;
  c.z = z;
  if (uses_mixture_prior(family)) {
    c.epochs = 1000;
    c.lr_policy = PlateauDecay{0.1, 50, 1e-4};
  } else {
    c.epochs = 10000;
    c.lr_policy = StepDecay{0.1, 2500};
    c.kl_anneal_epochs = 2500;
  }
  return c;
}

void ModelConfig::validate() const {
  if (z <= 0) throw UsageError("latent dimension must be positive");
  if (k < 2) throw UsageError("need at least two games");
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (batch_size <= 0) throw UsageError("batch size must be positive");
  if (learning_rate <= 0) throw UsageError("learning rate must be positive");
  for (int w : encoder_hidden) if (w <= 0) throw UsageError("hidden widths must be positive");
  for (int w : decoder_hidden) if (w <= 0) throw UsageError("hidden widths must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json lr;
  if (const auto* p = std::get_if<PlateauDecay>(&lr_policy)) {
    lr = {{"policy", "plateau"}, {"factor", p->factor}, {"patience", p->patience},
          {"rel_tolerance", p->rel_tolerance}};
  } else {
    const auto& s = std::get<StepDecay>(lr_policy);
    lr = {{"policy", "step"}, {"factor", s.factor}, {"every_n", s.every_n}};
  }
  return {{"family", std::string(to_string(family))},
          {"k", k},
          {"z", z},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"lr_schedule", lr},
          {"kl_anneal_epochs", kl_anneal_epochs},
          {"seed", seed},
          {"encoder_hidden", encoder_hidden},
          {"decoder_hidden", decoder_hidden},
          {"batch_size", batch_size}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  const Family family = family_from_string(j.at("family").get<std::string>());
  ModelConfig c = defaults(family, j.value("k", 4), j.value("z", 32));
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.kl_anneal_epochs = j.value("kl_anneal_epochs", c.kl_anneal_epochs);
  c.seed = j.value("seed", c.seed);
  c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
  c.decoder_hidden = j.value("decoder_hidden", c.decoder_hidden);
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("lr_schedule")) {
    const auto& lr = j.at("lr_schedule");
    const std::string policy = lr.at("policy").get<std::string>();
    if (policy == "plateau") {
      c.lr_policy = PlateauDecay{lr.value("factor", 0.1), lr.value("patience", 50),
                                 lr.value("rel_tolerance", 1e-4)};
    } else if (policy == "step") {
      c.lr_policy = StepDecay{lr.value("factor", 0.1), lr.value("every_n", 2500)};
    } else {
      throw UsageError("unknown learning-rate policy '" + policy + "'");
    }
  }
  return c;
}

LabelLayout label_layout(const ModelConfig& config) {
  LabelLayout l;
  if (!uses_mixture_prior(config.family)) l.game_bits = config.k;
  if (is_directional(config.family)) l.dir_bits = 4;
  return l;
}

DiagGaussian ComponentSet::component(int i) const {
  return {means.at(static_cast<std::size_t>(i)), vars.at(static_cast<std::size_t>(i))};
}

std::vector<DenseNet*> ModelCheckpoint::nets() {
  return {&encoder, &mean_head, &var_head, &decoder, &prior_mean, &prior_var};
}

std::vector<const DenseNet*> ModelCheckpoint::nets() const {
  return {&encoder, &mean_head, &var_head, &decoder, &prior_mean, &prior_var};
}

ComponentSet ModelCheckpoint::evaluate_components() const {
  if (!uses_mixture_prior(config.family)) throw FamilyMismatch("model has no mixture prior");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(config.k, config.k);
  const Eigen::MatrixXd means = predict(prior_mean, eye);
  const Eigen::MatrixXd vars = predict(prior_var, eye).array() + kVarianceFloor;
  ComponentSet set;
  for (int i = 0; i < config.k; ++i) {
    set.means.emplace_back(means.col(i));
    set.vars.emplace_back(vars.col(i));
  }
  return set;
}

ModelCheckpoint init_model(const ModelConfig& config, const TileVocab& vocab) {
  config.validate();
  if (vocab.game_count() != config.k) {
    throw DataError("config has k=" + std::to_string(config.k) + " but vocabulary lists " +
                    std::to_string(vocab.game_count()) + " games");
  }
  ModelCheckpoint m;
  m.config = config;
  m.vocab = vocab;
  const LabelLayout labels = m.labels();
  Rng rng = derive_rng(config.seed, 0);

  std::vector<Activation> relus(config.encoder_hidden.size(), Activation::kRelu);
  m.encoder = DenseNet(m.input_dim() + labels.width(), config.encoder_hidden, relus, rng);
  const int trunk_out = m.encoder.output_dim();
  m.mean_head = DenseNet(trunk_out, {config.z}, {Activation::kIdentity}, rng);
  m.var_head = DenseNet(trunk_out, {config.z}, {Activation::kSoftplus}, rng);

  std::vector<int> widths = config.decoder_hidden;
  std::vector<Activation> acts(widths.size(), Activation::kRelu);
  widths.push_back(m.input_dim());
  acts.push_back(Activation::kIdentity);
  m.decoder = DenseNet(config.z + labels.width(), widths, acts, rng);

  if (uses_mixture_prior(config.family)) {
    m.prior_mean = DenseNet(config.k, {config.z}, {Activation::kIdentity}, rng);
    m.prior_var = DenseNet(config.k, {config.z}, {Activation::kSoftplus}, rng);
    m.components = m.evaluate_components();
  }
  return m;
}

Batch make_batch(const std::vector<Segment>& segments, std::span<const int> indices,
                 const ModelCheckpoint& model) {
  const int b = static_cast<int>(indices.size());
  const auto vocab_size = static_cast<std::size_t>(model.vocab_size());
  const int k = model.config.k;
  const bool need_dir = is_directional(model.config.family);
  Batch batch;
  batch.x = Eigen::MatrixXd::Zero(model.input_dim(), b);
  batch.games = Eigen::MatrixXd::Zero(k, b);
  batch.dirs = Eigen::MatrixXd::Zero(need_dir ? 4 : 0, b);
  batch.targets.reserve(static_cast<std::size_t>(b) * kSegmentCells);
  for (int j = 0; j < b; ++j) {
    const int index = indices[static_cast<std::size_t>(j)];
    const Segment& s = segments.at(static_cast<std::size_t>(index));
    if (s.grid.rows != kSegmentRows || s.grid.cols != kSegmentCols) {
      throw BadShape("segment " + std::to_string(index) + " is not 15x16");
    }
    encode_onehot(s.grid, vocab_size,
                  std::span<double>(batch.x.col(j).data(), static_cast<std::size_t>(batch.x.rows())));
    batch.targets.insert(batch.targets.end(), s.grid.cells.begin(), s.grid.cells.end());
    if (!s.game || *s.game < 0 || *s.game >= k) {
      throw DataError("segment " + std::to_string(index) + " has no valid game label");
    }
    batch.games(*s.game, j) = 1.0;
    if (need_dir) {
      if (!s.dir) throw MissingDirectionalLabel(index);
      for (int d = 0; d < 4; ++d) batch.dirs(d, j) = (*s.dir)[static_cast<std::size_t>(d)];
    }
  }
  return batch;
}

std::vector<std::span<const double>> ModelGradients::views() const {
  std::vector<std::span<const double>> out;
  for (const auto& g : nets) {
    auto v = g.views();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

double kl_weight(int epoch, int span) {
  if (span <= 0) return 1.0;
  return std::min(1.0, static_cast<double>(epoch) / span);
}

double reconstruction_loss(const Eigen::MatrixXd& logits, std::span<const TileId> targets,
                           int vocab_size, Eigen::MatrixXd* grad) {
  const Eigen::Index cells = logits.rows() / vocab_size;
  if (static_cast<std::size_t>(cells * logits.cols()) != targets.size()) {
    throw DimMismatch("reconstruction targets do not match logits");
  }
  if (grad) grad->resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    for (Eigen::Index c = 0; c < cells; ++c) {
      const auto block = logits.col(b).segment(c * vocab_size, vocab_size);
      const double max = block.maxCoeff();
      const double lse = max + std::log((block.array() - max).exp().sum());
      const TileId target = targets[static_cast<std::size_t>(b * cells + c)];
      total += lse - block(target);
      if (grad) {
        auto g = grad->col(b).segment(c * vocab_size, vocab_size);
        g = (block.array() - lse).exp().matrix();
        g(target) -= 1.0;
      }
    }
  }
  return total;
}

namespace {

Eigen::MatrixXd label_matrix(const ModelCheckpoint& model, const Batch& batch) {
  const LabelLayout l = model.labels();
  Eigen::MatrixXd cond(l.width(), batch.size());
  if (l.game_bits) cond.topRows(l.game_bits) = batch.games;
  if (l.dir_bits) cond.bottomRows(l.dir_bits) = batch.dirs;
  return cond;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

LossResult elbo_loss(const ModelCheckpoint& model, const Batch& batch, const Eigen::MatrixXd& noise,
                     double beta) {
  const int z = model.config.z;
  const int n = batch.size();
  if (noise.rows() != z || noise.cols() != n) throw DimMismatch("noise must be z x batch");
  const double inv_n = 1.0 / n;
  const Eigen::MatrixXd cond = label_matrix(model, batch);

  // Encoder.
  const auto trunk = forward(model.encoder, stack(batch.x, cond));
  const auto mean_fw = forward(model.mean_head, trunk.output);
  const auto var_fw = forward(model.var_head, trunk.output);
  const Eigen::MatrixXd& mu = mean_fw.output;
  const Eigen::ArrayXXd var = var_fw.output.array() + kVarianceFloor;
  const Eigen::ArrayXXd sd = var.sqrt();
  const Eigen::MatrixXd latent = (mu.array() + sd * noise.array()).matrix();

  // Decoder.
  const auto dec = forward(model.decoder, stack(latent, cond));
  Eigen::MatrixXd dlogits;
  const double recon =
      reconstruction_loss(dec.output, batch.targets, model.vocab_size(), &dlogits) * inv_n;
  dlogits *= inv_n;

  // Prior.
  const bool mixture = uses_mixture_prior(model.config.family);
  Eigen::ArrayXXd prior_mu = Eigen::ArrayXXd::Zero(z, n);
  Eigen::ArrayXXd prior_var = Eigen::ArrayXXd::Ones(z, n);
  ForwardResult pm_fw, pv_fw;
  if (mixture) {
    pm_fw = forward(model.prior_mean, batch.games);
    pv_fw = forward(model.prior_var, batch.games);
    prior_mu = pm_fw.output.array();
    prior_var = pv_fw.output.array() + kVarianceFloor;
  }
  const Eigen::ArrayXXd diff = mu.array() - prior_mu;
  const double kl =
      0.5 * ((prior_var / var).log() + (var + diff.square()) / prior_var - 1.0).sum() * inv_n;

  LossResult result;
  result.reconstruction = recon;
  result.kl = kl;
  result.loss = recon + beta * kl;

  // Backward.
  const NetGradients dec_grad = backward(model.decoder, dec.tape, dlogits);
  const Eigen::ArrayXXd dlatent = dec_grad.input.topRows(z).array();
  const double w = beta * inv_n;
  const Eigen::MatrixXd dmu = (dlatent + w * diff / prior_var).matrix();
  const Eigen::MatrixXd dvar =
      (dlatent * noise.array() / (2.0 * sd) + w * 0.5 * (1.0 / prior_var - 1.0 / var)).matrix();
  NetGradients mean_grad = backward(model.mean_head, mean_fw.tape, dmu);
  NetGradients var_grad = backward(model.var_head, var_fw.tape, dvar);
  const Eigen::MatrixXd dtrunk = mean_grad.input + var_grad.input;
  NetGradients enc_grad = backward(model.encoder, trunk.tape, dtrunk);

  NetGradients pm_grad, pv_grad;
  if (mixture) {
    const Eigen::MatrixXd dpm = (-w * diff / prior_var).matrix();
    const Eigen::MatrixXd dpv =
        (w * 0.5 * (1.0 / prior_var - (var + diff.square()) / prior_var.square())).matrix();
    pm_grad = backward(model.prior_mean, pm_fw.tape, dpm);
    pv_grad = backward(model.prior_var, pv_fw.tape, dpv);
  }
  result.grads.nets = {std::move(enc_grad), std::move(mean_grad), std::move(var_grad),
                       dec_grad,            std::move(pm_grad),   std::move(pv_grad)};
  return result;
}

LossResult gmvae_loss(const ModelCheckpoint& model, const Batch& batch,
                      const Eigen::MatrixXd& noise) {
  if (!uses_mixture_prior(model.config.family)) {
    throw FamilyMismatch("gmvae_loss needs a mixture-prior family");
  }
  return elbo_loss(model, batch, noise, 1.0);
}

LossResult cvae_loss(const ModelCheckpoint& model, const Batch& batch, const Eigen::MatrixXd& noise,
                     double beta) {
  if (uses_mixture_prior(model.config.family)) {
    throw FamilyMismatch("cvae_loss needs a conditional family");
  }
  return elbo_loss(model, batch, noise, beta);
}

std::vector<DiagGaussian> encode(const ModelCheckpoint& model, const std::vector<Segment>& segments) {
  std::vector<int> indices(segments.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
  const Batch batch = make_batch(segments, indices, model);
  const Eigen::MatrixXd h = predict(model.encoder, stack(batch.x, label_matrix(model, batch)));
  const Eigen::MatrixXd mu = predict(model.mean_head, h);
  const Eigen::MatrixXd var = predict(model.var_head, h).array() + kVarianceFloor;
  std::vector<DiagGaussian> out;
  for (Eigen::Index j = 0; j < mu.cols(); ++j) out.push_back({mu.col(j), var.col(j)});
  return out;
}

Eigen::MatrixXd decode_logits(const ModelCheckpoint& model, const Eigen::MatrixXd& latents,
                              const Eigen::MatrixXd& labels) {
  if (labels.rows() != model.labels().width() || labels.cols() != latents.cols()) {
    throw DimMismatch("decoder labels have the wrong shape");
  }
  return predict(model.decoder, stack(latents, labels));
}

}  // namespace gameblend
