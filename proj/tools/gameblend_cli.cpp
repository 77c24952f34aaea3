// gameblend command-line tool. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gameblend/blender.hpp"
#include "gameblend/errors.hpp"
#include "gameblend/layout.hpp"
#include "gameblend/workbench.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gameblend;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "run configuration file (JSON, comments allowed)");
  sub->add_option("--seed", c.seed, "seed; overrides the config seed");
  sub->add_option("-o,--out", c.out, "output file or directory");
}

std::optional<RunConfig> load_config(const Common& c, bool required) {
  if (c.config.empty()) {
    if (required) throw UsageError("--config is required");
    return std::nullopt;
  }
  RunConfig rc = RunConfig::load(c.config);
  if (c.seed) {
    rc.seed = *c.seed;
    rc.model.seed = *c.seed;
    rc.forest.seed = *c.seed;
  }
  return rc;
}

std::uint64_t seed_of(const Common& c, const std::optional<RunConfig>& rc) {
  if (c.seed) return *c.seed;
  return rc ? rc->seed : 0;
}

json provenance(const Common& c, const std::optional<RunConfig>& rc) {
  json p = rc ? rc->provenance() : json{{"config_hash", nullptr}, {"tool_version", kToolVersion}};
  p["seed"] = seed_of(c, rc);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::optional<DirLabel> parse_dir(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    return dir_from_string(s);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

// id=path pairs; a bare path takes its file stem as the id.
std::pair<std::string, fs::path> split_id(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) return {fs::path(s).stem().string(), s};
  return {s.substr(0, eq), s.substr(eq + 1)};
}

int cmd_ingest(const Common& c) {
  const RunConfig rc = *load_config(c, true);
  const Corpus corpus = load_corpus(rc);
  json j = corpus_to_json(corpus);
  j["provenance"] = provenance(c, rc);
  const fs::path out = c.out.empty() ? rc.output / "dataset.json" : fs::path(c.out);
  write_json(out, j);
  for (int g = 0; g < corpus.game_count(); ++g) {
    const auto before = corpus.counts_before.count(g) ? corpus.counts_before.at(g) : 0;
    const auto after = corpus.counts_after.count(g) ? corpus.counts_after.at(g) : 0;
    std::cout << corpus.vocab.game(g).name << ": " << before << " segments, " << after
              << " after upsampling\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& dataset, std::optional<int> epochs, bool quiet) {
  RunConfig rc = *load_config(c, true);
  if (!dataset.empty()) rc.dataset = dataset;
  if (epochs) rc.model.epochs = *epochs;
  const Corpus corpus = load_corpus(rc);
  if (corpus.game_count() != rc.model.k) {
    throw UsageError("model k = " + std::to_string(rc.model.k) + " but the corpus has " +
                     std::to_string(corpus.game_count()) + " games");
  }
  TrainObserver obs;
  const int every = std::max(1, rc.model.epochs / 20);
  if (!quiet) {
    obs.on_epoch = [every](int epoch, double loss, double lr) {
      if ((epoch + 1) % every == 0) std::cerr << "epoch " << epoch + 1 << " loss " << loss << " lr " << lr << "\n";
    };
  }
  ModelCheckpoint m = train_model(corpus, rc.model, obs);
  m.provenance = provenance(c, rc);
  const fs::path out = c.out.empty() ? rc.output / "model.ck" : fs::path(c.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_checkpoint(m, out);
  std::cout << "wrote " << out.string() << " (final loss " << m.loss_history.back() << ")\n";
  return 0;
}

int cmd_sample(const Common& c, const std::string& ckpt, const std::string& weights, int n,
               const std::string& dir) {
  const auto rc = load_config(c, false);
  const ModelCheckpoint m = load_checkpoint(ckpt);
  const BlendWeights w = BlendWeights::parse(weights);
  const auto d = parse_dir(dir);
  Rng rng(seed_of(c, rc));
  const auto segs = sample_blend(m, w, n, d, rng);
  const fs::path out = c.out.empty() ? fs::path("samples") : fs::path(c.out);
  fs::create_directories(out);
  json files = json::array();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "segment_%04zu.txt", i);
    write_text(out / name, render_glyphs(segs[i].grid, m.vocab));
    files.push_back({{"file", name}, {"tiles", grid_to_json(segs[i].grid)}});
  }
  json meta{{"checkpoint", ckpt},
            {"model_provenance", m.provenance},
            {"family", to_string(m.config.family)},
            {"weights", w.label()},
            {"count", n},
            {"segments", files},
            {"provenance", provenance(c, rc)}};
  meta["dir"] = d ? json(dir_to_string(*d)) : json(nullptr);
  write_json(out / "metadata.json", meta);
  std::cout << "wrote " << segs.size() << " segments to " << out.string() << "\n";
  return 0;
}

std::optional<std::vector<JumpModel>> try_jumps(const std::string& path, const std::optional<RunConfig>& rc,
                                                const TileVocab& vocab) {
  fs::path p;
  if (!path.empty()) p = path;
  else if (rc && rc->jumps) p = *rc->jumps;
  else return std::nullopt;
  return jumps_for(JumpTable::load(p), vocab);
}

int cmd_layout(const Common& c, const std::string& ckpt, const std::string& weights, const std::string& kind,
               int n, const std::string& jumps) {
  const auto rc = load_config(c, false);
  const ModelCheckpoint m = load_checkpoint(ckpt);
  const BlendWeights w = BlendWeights::parse(weights);
  const LayoutKind k = layout_kind_from_string(kind);
  if (n < 1) throw UsageError("-n must be at least 1");
  Rng rng(seed_of(c, rc));
  const Layout l = k == LayoutKind::kDungeon ? gen_dungeon_layout(n, rng) : gen_platformer_layout(n, rng);
  const WholeLevel level = assemble(l, m, w, rng);
  const fs::path out = c.out.empty() ? fs::path("level") : fs::path(c.out);
  fs::create_directories(out);
  write_text(out / "level.txt", render_glyphs(level.grid, m.vocab));
  json side = level.sidecar();
  side["weights"] = w.label();
  side["checkpoint"] = ckpt;
  side["provenance"] = provenance(c, rc);
  if (const auto j = try_jumps(jumps, rc, m.vocab)) {
    const auto arcs = jump_arcs(blend_jump(*j, w));
    for (std::size_t i = 0; i < level.segments.size(); ++i) {
      side["locations"][i]["playable"] = playability(level.segments[i].grid, m.vocab, arcs);
    }
  }
  write_json(out / "level.json", side);
  std::cout << "wrote " << (out / "level.txt").string() << " (" << level.grid.rows << "x" << level.grid.cols
            << ")\n";
  return 0;
}

int cmd_play(const Common& c, const std::string& level, const std::string& ckpt, const std::string& vocab_path,
             const std::string& game, const std::string& weights, const std::string& jumps) {
  const auto rc = load_config(c, false);
  TileVocab vocab;
  if (!ckpt.empty()) vocab = load_checkpoint(ckpt).vocab;
  else if (!vocab_path.empty()) vocab = TileVocab::load(vocab_path);
  else if (rc && rc->vocab) vocab = TileVocab::load(*rc->vocab);
  else throw UsageError("play needs --ckpt, --vocab or a config with a vocab");
  const std::string text = read_text_file(level);
  TileGrid grid;
  if (game.empty()) {
    grid = parse_glyphs(text, vocab);
  } else {
    const auto g = vocab.find_game(game);
    if (!g) throw UsageError("unknown game '" + game + "'");
    grid = parse_level(text, vocab, *g);
  }
  const auto table = try_jumps(jumps, rc, vocab);
  if (!table) throw UsageError("play needs --jumps or a config with jumps");
  const BlendWeights w = weights.empty() ? BlendWeights(std::vector<double>(table->size(), 1.0))
                                         : BlendWeights::parse(weights);
  const Playability p = evaluate_playability(to_affordances(grid, vocab), jump_arcs(blend_jump(*table, w)));
  json out{{"level", level},
           {"playable", p.playable()},
           {"left_to_right", p.left_to_right.to_json()},
           {"bottom_to_top", p.bottom_to_top.to_json()}};
  if (c.out.empty()) std::cout << out.dump(2) << "\n";
  else write_json(c.out, out);
  return 0;
}

int cmd_eval(const Common& c, const std::string& ckpt, bool binary, bool fractional, std::optional<int> samples,
             std::optional<int> dir_samples, const std::string& classifier_path, const std::string& sample_dir) {
  const RunConfig rc = *load_config(c, true);
  const ModelCheckpoint m = load_checkpoint(ckpt);
  const Corpus corpus = load_corpus(rc);
  if (!(corpus.vocab == m.vocab)) throw DataError("checkpoint vocabulary differs from the config corpus");
  const fs::path out = c.out.empty() ? rc.output / "report" : fs::path(c.out);
  fs::create_directories(out);

  ForestClassifier game_clf = classifier_path.empty() ? train_game_classifier(corpus, rc.forest)
                                                      : ForestClassifier::load(classifier_path);
  if (classifier_path.empty()) game_clf.save(out / "classifier.json");
  std::optional<ForestClassifier> dir_clf;
  if (is_directional(m.config.family)) {
    dir_clf = train_dir_classifier(corpus, rc.forest);
    dir_clf->save(out / "dir_classifier.json");
  }

  ExperimentSpec spec;
  spec.model = &m;
  spec.classifier = &game_clf;
  spec.dir_classifier = dir_clf ? &*dir_clf : nullptr;
  for (int g = 0; g < corpus.game_count(); ++g) spec.references.push_back(corpus.game_segments(g));
  if (rc.jumps) spec.jumps = jumps_for(JumpTable::load(*rc.jumps), m.vocab);
  if (!binary && !fractional) {
    binary = rc.experiment.binary;
    fractional = rc.experiment.fractional;
  }
  if (binary) spec.weights = binary_weights(m.config.k);
  if (fractional) {
    for (auto& w : default_fractional_weights(m.config.k)) spec.weights.push_back(w);
  }
  spec.samples = samples.value_or(rc.experiment.samples);
  spec.dir_samples = dir_samples.value_or(rc.experiment.dir_samples);
  spec.tpkl = rc.experiment.tpkl;
  spec.seed = rc.seed;
  spec.sample_dir = parse_dir(sample_dir);

  Report r = run_experiment(spec);
  r.provenance["run"] = provenance(c, rc);
  r.provenance["model"] = m.provenance;
  r.provenance["classifier_test_accuracy"] =
      game_clf.test_accuracy() ? json(*game_clf.test_accuracy()) : json(nullptr);
  r.provenance["forest"] = rc.forest.to_json();
  r.provenance["features"] = "flattened one-hot tiles";
  r.write(out);
  std::cout << r.classification_csv();
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Common& c, const std::vector<std::string>& ckpts, const std::vector<std::string>& classifiers,
              const std::string& jumps, const std::string& host, int port) {
  const auto rc = load_config(c, false);
  if (ckpts.empty()) throw UsageError("serve needs at least one --ckpt");
  auto session = std::make_shared<Session>();
  for (const auto& s : ckpts) {
    auto [id, path] = split_id(s);
    if (session->models.count(id)) throw UsageError("duplicate model id '" + id + "'");
    LoadedModel lm{load_checkpoint(path), std::nullopt, std::nullopt};
    try {
      lm.jumps = try_jumps(jumps, rc, lm.checkpoint.vocab);
    } catch (const DataError& e) {
      std::cerr << "warning: no jump parameters for '" << id << "': " << e.what() << "\n";
    }
    session->models.emplace(id, std::move(lm));
  }
  for (const auto& s : classifiers) {
    auto [id, path] = split_id(s);
    auto it = session->models.find(id);
    if (it == session->models.end()) throw UsageError("classifier for unknown model '" + id + "'");
    it->second.classifier = ForestClassifier::load(path);
  }
  const Service service(session);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gameblend: blend game levels with latent-variable models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  auto* ingest = app.add_subcommand("ingest", "build the corpus and cache it as an encoded dataset");
  add_common(ingest, common);

  auto* train = app.add_subcommand("train", "train a model from the configured corpus");
  add_common(train, common);
  std::string dataset;
  std::optional<int> epochs;
  bool quiet = false;
  train->add_option("--dataset", dataset, "dataset cache from ingest");
  train->add_option("--epochs", epochs, "override the configured epoch count");
  train->add_flag("-q,--quiet", quiet, "no per-epoch progress");

  std::string ckpt, weights, dir, kind = "dungeon", jumps;
  int n = 1;
  auto* sample = app.add_subcommand("sample", "sample blended segments");
  add_common(sample, common);
  sample->add_option("--ckpt", ckpt, "checkpoint")->required();
  sample->add_option("--weights", weights, "blend weights, e.g. 0,0,0,1")->required();
  sample->add_option("-n,--count", n, "number of segments")->check(CLI::NonNegativeNumber);
  sample->add_option("--dir", dir, "directional label UDLR, e.g. 1010");

  auto* layout = app.add_subcommand("layout", "generate and assemble a whole level");
  add_common(layout, common);
  layout->add_option("--ckpt", ckpt, "cgmvae or ccvae checkpoint")->required();
  layout->add_option("--weights", weights, "blend weights")->required();
  layout->add_option("--kind", kind, "dungeon or platformer");
  layout->add_option("-n,--count", n, "number of locations");
  layout->add_option("--jumps", jumps, "jump parameter file; adds per-location playability");

  std::string level, vocab_path, game;
  auto* play = app.add_subcommand("play", "check a level file for playability");
  add_common(play, common);
  play->add_option("level", level, "level text file")->required();
  play->add_option("--ckpt", ckpt, "take the vocabulary from this checkpoint");
  play->add_option("--vocab", vocab_path, "vocabulary file");
  play->add_option("--game", game, "parse with this game's characters instead of glyphs");
  play->add_option("--weights", weights, "blend weights for the jump (default: equal)");
  play->add_option("--jumps", jumps, "jump parameter file");

  bool binary = false, fractional = false;
  std::optional<int> samples, dir_samples;
  std::string classifier, sample_dir;
  auto* eval = app.add_subcommand("eval", "run the blend evaluations and write a report");
  add_common(eval, common);
  eval->add_option("--ckpt", ckpt, "checkpoint")->required();
  eval->add_flag("--binary", binary, "the 2^k - 1 binary weights");
  eval->add_flag("--fractional", fractional, "the default fractional weights");
  eval->add_option("--samples", samples, "segments per weight");
  eval->add_option("--dir-samples", dir_samples, "segments per directional label");
  eval->add_option("--classifier", classifier, "reuse a saved game classifier");
  eval->add_option("--sample-dir", sample_dir, "directional label for the classification tables");

  std::vector<std::string> ckpts, classifiers;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve sampling, layout and playability over HTTP");
  add_common(serve, common);
  serve->add_option("--ckpt", ckpts, "id=checkpoint, repeatable")->required();
  serve->add_option("--classifier", classifiers, "id=classifier.json, repeatable");
  serve->add_option("--jumps", jumps, "jump parameter file");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port, 0 for any");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*ingest) return cmd_ingest(common);
    if (*train) return cmd_train(common, dataset, epochs, quiet);
    if (*sample) return cmd_sample(common, ckpt, weights, n, dir);
    if (*layout) return cmd_layout(common, ckpt, weights, kind, n, jumps);
    if (*play) return cmd_play(common, level, ckpt, vocab_path, game, weights, jumps);
    if (*eval) return cmd_eval(common, ckpt, binary, fractional, samples, dir_samples, classifier, sample_dir);
    if (*serve) return cmd_serve(common, ckpts, classifiers, jumps, host, port);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
