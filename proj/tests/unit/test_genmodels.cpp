#include <fstream>

#include "../oracles/gradcheck.hpp"
#include "doctest.h"
#include "gameblend/errors.hpp"
#include "gameblend/genmodels.hpp"
#include "helpers.hpp"

using namespace gameblend;

namespace {

ModelConfig toy_config(Family f, int k = 2) {
  ModelConfig c = ModelConfig::defaults(f, k, 3);
  c.encoder_hidden = {6, 5};
  c.decoder_hidden = {5};
  c.epochs = 3;
  c.batch_size = 8;
  c.seed = 17;
  return c;
}

Corpus toy_corpus(int k = 2, bool directional = true) {
  SyntheticOptions o;
  o.games = k;
  o.per_game = 6;
  o.directional = directional;
  o.seed = 5;
  return make_synthetic_corpus(o);
}

}  // namespace

TEST_CASE("config defaults follow the family schedule") {
  const ModelConfig gm = ModelConfig::defaults(Family::kGmvae, 4, 32);
  CHECK(gm.epochs == 1000);
  CHECK(std::holds_alternative<PlateauDecay>(gm.lr_policy));
  const ModelConfig cv = ModelConfig::defaults(Family::kCvae, 4, 32);
  CHECK(cv.epochs == 10000);
  REQUIRE(std::holds_alternative<StepDecay>(cv.lr_policy));
  CHECK(std::get<StepDecay>(cv.lr_policy).every_n == 2500);
  CHECK(cv.kl_anneal_epochs == 2500);
  CHECK(gm.encoder_hidden == std::vector<int>{512, 256, 128});
  CHECK(gm.decoder_hidden == std::vector<int>{128, 256});

  const ModelConfig back = ModelConfig::from_json(cv.to_json());
  CHECK(back.to_json() == cv.to_json());
}

TEST_CASE("label layouts per family") {
  CHECK(label_layout(toy_config(Family::kGmvae)).width() == 0);
  CHECK(label_layout(toy_config(Family::kCvae)).width() == 2);
  CHECK(label_layout(toy_config(Family::kCgmvae)).width() == 4);
  CHECK(label_layout(toy_config(Family::kCcvae, 4)).width() == 8);
}

TEST_CASE("every family's loss gradient matches finite differences") {
  const Corpus corpus = toy_corpus();
  for (Family f : {Family::kGmvae, Family::kCvae, Family::kCgmvae, Family::kCcvae}) {
    CAPTURE(to_string(f));
    const ModelCheckpoint m = init_model(toy_config(f), corpus.vocab);
    const std::vector<int> idx = {0, 3, 7};
    const Batch b = make_batch(corpus.segments, idx, m);
    Rng rng(2);
    const Eigen::MatrixXd noise = standard_normal(3, 3, rng);
    const double beta = uses_mixture_prior(f) ? 1.0 : 0.4;
    const auto r = oracle::check_model_gradients(m, b, noise, beta, 25, 99);
    CHECK(r.checked > 100);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("loss wrappers reject the wrong family") {
  const Corpus corpus = toy_corpus();
  const ModelCheckpoint gm = init_model(toy_config(Family::kGmvae), corpus.vocab);
  const std::vector<int> idx = {0};
  const Batch b = make_batch(corpus.segments, idx, gm);
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(cvae_loss(gm, b, noise, 1.0), FamilyMismatch);
  CHECK_NOTHROW(gmvae_loss(gm, b, noise));
}

TEST_CASE("kl weight anneals linearly") {
  CHECK(kl_weight(0, 2500) == 0.0);
  CHECK(kl_weight(1250, 2500) == 0.5);
  CHECK(kl_weight(9000, 2500) == 1.0);
}

TEST_CASE("directional families need labels on every segment") {
  Corpus corpus = toy_corpus(2, false);
  const ModelCheckpoint m = init_model(toy_config(Family::kCgmvae), corpus.vocab);
  const std::vector<int> idx = {0, 1};
  CHECK_THROWS_AS(make_batch(corpus.segments, idx, m), MissingDirectionalLabel);
  CHECK_THROWS_AS(train_conditional_directional(corpus, toy_config(Family::kCgmvae)),
                  MissingDirectionalLabel);
}

TEST_CASE("training is deterministic and lowers the loss") {
  const Corpus corpus = toy_corpus();
  ModelConfig c = toy_config(Family::kGmvae);
  c.epochs = 20;
  c.learning_rate = 3e-3;
  int calls = 0;
  TrainObserver obs{[&](int, double, double) { ++calls; }};
  const ModelCheckpoint a = train_gmvae(corpus, c, obs);
  const ModelCheckpoint b = train_gmvae(corpus, c);
  CHECK(calls == 20);
  CHECK(a.loss_history == b.loss_history);
  CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
  CHECK(a.loss_history.back() < a.loss_history.front());
  REQUIRE(a.components);
  CHECK(a.components->size() == 2);
  CHECK_THROWS_AS(train_cvae(corpus, c), FamilyMismatch);
}

TEST_CASE("divergent training reports the epoch") {
  const Corpus corpus = toy_corpus();
  ModelConfig c = toy_config(Family::kCvae);
  c.epochs = 50;
  c.learning_rate = 1e200;
  CHECK_THROWS_AS(train_cvae(corpus, c), NonFiniteLoss);
}

TEST_CASE("checkpoint round trip is exact") {
  const Corpus corpus = toy_corpus();
  for (Family f : {Family::kGmvae, Family::kCcvae}) {
    ModelConfig c = toy_config(f);
    c.epochs = 2;
    ModelCheckpoint m = train_model(corpus, c);
    m.provenance = {{"seed", 17}, {"config_hash", "abc"}};
    const std::string bytes = serialize_checkpoint(m);
    const ModelCheckpoint back = deserialize_checkpoint(bytes);
    CHECK(serialize_checkpoint(back) == bytes);
    CHECK(back.encoder == m.encoder);
    CHECK(back.decoder == m.decoder);
    CHECK(back.vocab == m.vocab);
    CHECK(back.loss_history == m.loss_history);
    CHECK(back.provenance == m.provenance);
    CHECK(back.components.has_value() == m.components.has_value());

    const auto dir = testing::temp_dir("ckpt");
    save_checkpoint(m, dir / "m.ck");
    CHECK(serialize_checkpoint(load_checkpoint(dir / "m.ck")) == bytes);
  }
}

TEST_CASE("damaged checkpoints are rejected") {
  const Corpus corpus = toy_corpus();
  ModelConfig c = toy_config(Family::kGmvae);
  c.epochs = 1;
  const std::string bytes = serialize_checkpoint(train_model(corpus, c));
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), CorruptCheckpoint);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 6)), CorruptCheckpoint);
  std::string flipped = bytes;
  flipped[flipped.size() - 20] ^= 0x40;
  CHECK_THROWS_AS(deserialize_checkpoint(flipped), CorruptCheckpoint);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(magic), CorruptCheckpoint);
  std::string version = bytes;
  version[8] = 9;  // u32 version right after the magic
  CHECK_THROWS_AS(deserialize_checkpoint(version), VersionMismatch);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ck"), DataError);
}

TEST_CASE("encode and decode shapes") {
  const Corpus corpus = toy_corpus();
  const ModelCheckpoint m = init_model(toy_config(Family::kCcvae), corpus.vocab);
  const auto q = encode(m, {corpus.segments.begin(), corpus.segments.begin() + 4});
  REQUIRE(q.size() == 4);
  CHECK(q[0].mean.size() == 3);
  CHECK((q[0].var.array() > 0.0).all());
  const Eigen::MatrixXd logits = decode_logits(m, Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(6, 2));
  CHECK(logits.rows() == 240 * m.vocab_size());
  CHECK_THROWS_AS(decode_logits(m, Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(4, 2)), DimMismatch);
}
