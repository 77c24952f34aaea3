#include <algorithm>
#include <cstdio>

#include "gameblend/errors.hpp"
#include "gameblend/workbench.hpp"

namespace gameblend {

namespace fs = std::filesystem;

nlohmann::json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
}

nlohmann::json load_json_file(const fs::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

std::string config_hash(const nlohmann::json& canonical) {
  const std::string text = canonical.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// A directory stands for every regular file in it, sorted by name.
std::vector<fs::path> expand_levels(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig c;
  try {
    if (!j.contains("seed")) throw UsageError("config needs a seed");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("vocab")) c.vocab = resolve(base, j["vocab"].get<std::string>());
    if (j.contains("dataset")) c.dataset = resolve(base, j["dataset"].get<std::string>());
    if (j.contains("jumps")) c.jumps = resolve(base, j["jumps"].get<std::string>());
    if (j.contains("output")) c.output = resolve(base, j["output"].get<std::string>());
    else c.output = resolve(base, "out");

    int k = 0;
    if (j.contains("synthetic")) {
      const auto& s = j["synthetic"];
      SyntheticOptions o;
      o.games = s.value("games", o.games);
      o.per_game = s.value("per_game", o.per_game);
      o.directional = s.value("directional", o.directional);
      o.seed = s.value("seed", c.seed);
      c.synthetic = o;
      k = o.games;
    }
    for (const auto& g : j.value("games", nlohmann::json::array())) {
      GameSource src;
      src.game = g.at("name").get<std::string>();
      for (const auto& p : g.at("levels")) {
        for (auto& f : expand_levels(resolve(base, p.get<std::string>()))) src.levels.push_back(f);
      }
      if (g.contains("pad")) src.pad = pad_policy_from_string(g["pad"].get<std::string>());
      src.filter_solid = g.value("filter_solid", false);
      src.tiled = g.value("tiled", false);
      if (g.contains("annotations")) src.annotations = resolve(base, g["annotations"].get<std::string>());
      c.games.push_back(std::move(src));
    }
    if (!c.games.empty()) k = static_cast<int>(c.games.size());

    nlohmann::json model = j.value("model", nlohmann::json{{"family", "gmvae"}});
    if (!model.contains("k") && k > 0) model["k"] = k;
    if (!model.contains("seed")) model["seed"] = c.seed;
    c.model = ModelConfig::from_json(model);
    c.model.validate();

    if (j.contains("forest")) c.forest = ForestHyper::from_json(j["forest"]);
    if (!j.contains("forest") || !j["forest"].contains("seed")) c.forest.seed = c.seed;

    if (j.contains("experiment")) {
      const auto& e = j["experiment"];
      c.experiment.binary = e.value("binary", true);
      c.experiment.fractional = e.value("fractional", true);
      c.experiment.samples = e.value("samples", c.experiment.samples);
      c.experiment.dir_samples = e.value("dir_samples", c.experiment.dir_samples);
      c.experiment.tpkl.windows = e.value("windows", c.experiment.tpkl.windows);
      c.experiment.tpkl.eps = e.value("eps", c.experiment.tpkl.eps);
      if (c.experiment.samples < 1 || c.experiment.dir_samples < 1) {
        throw UsageError("experiment sample counts must be positive");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  c.hash = config_hash(j);
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("config file " + path.string() + " does not exist");
  RunConfig c = parse(load_json_file(path), path.parent_path());
  c.source = path;
  return c;
}

void RunConfig::validate() const {
  if (games.empty() && !synthetic && !dataset) {
    throw UsageError("config names no corpus (games, synthetic or dataset)");
  }
  if (!games.empty() && !vocab && !dataset) throw UsageError("level files need a vocab file");
  auto need = [](const fs::path& p) {
    if (!fs::exists(p)) throw DataError("path " + p.string() + " does not exist");
  };
  if (vocab) need(*vocab);
  if (jumps) need(*jumps);
  if (dataset) need(*dataset);
  for (const auto& g : games) {
    if (g.levels.empty()) throw DataError("game '" + g.game + "' lists no level files");
    for (const auto& l : g.levels) need(l);
    if (g.annotations) need(*g.annotations);
  }
}

nlohmann::json RunConfig::provenance() const {
  return {{"config_hash", hash}, {"seed", seed}, {"tool_version", kToolVersion}};
}

Corpus load_corpus(const RunConfig& config) {
  config.validate();
  if (config.dataset) return corpus_from_json(load_json_file(*config.dataset));
  if (config.synthetic) return make_synthetic_corpus(*config.synthetic);
  return build_corpus(config.games, TileVocab::load(*config.vocab));
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment& s : corpus.segments) {
    nlohmann::json e{{"rows", s.grid.rows}, {"cols", s.grid.cols}, {"tiles", s.grid.cells}};
    e["game"] = s.game ? nlohmann::json(*s.game) : nlohmann::json(nullptr);
    e["dir"] = s.dir ? nlohmann::json(dir_to_string(*s.dir)) : nlohmann::json(nullptr);
    segs.push_back(std::move(e));
  }
  auto counts = [](const std::map<GameId, int>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [g, n] : m) out.push_back({g, n});
    return out;
  };
  return {{"format", "gameblend-dataset"},
          {"version", 1},
          {"vocab", corpus.vocab.to_json()},
          {"counts_before", counts(corpus.counts_before)},
          {"counts_after", counts(corpus.counts_after)},
          {"segments", std::move(segs)}};
}

Corpus corpus_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "gameblend-dataset") throw DataError("not a gameblend dataset");
    if (j.at("version") != 1) throw VersionMismatch("unsupported dataset version");
    Corpus c;
    c.vocab = TileVocab::from_json(j.at("vocab"));
    for (const auto& p : j.at("counts_before")) c.counts_before[p.at(0).get<int>()] = p.at(1).get<int>();
    for (const auto& p : j.at("counts_after")) c.counts_after[p.at(0).get<int>()] = p.at(1).get<int>();
    for (const auto& e : j.at("segments")) {
      Segment s;
      s.grid = TileGrid(e.at("rows").get<int>(), e.at("cols").get<int>());
      s.grid.cells = e.at("tiles").get<std::vector<TileId>>();
      if (s.grid.cells.size() != static_cast<std::size_t>(s.grid.rows) * s.grid.cols) {
        throw DataError("dataset segment has the wrong number of tiles");
      }
      for (TileId t : s.grid.cells) {
        if (t >= c.vocab.size()) throw DataError("dataset tile id out of range");
      }
      if (!e.at("game").is_null()) s.game = e["game"].get<GameId>();
      if (!e.at("dir").is_null()) s.dir = dir_from_string(e["dir"].get<std::string>());
      c.segments.push_back(std::move(s));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dataset: ") + e.what());
  }
}

ForestClassifier train_game_classifier(const Corpus& corpus, const ForestHyper& hyper) {
  std::vector<int> labels;
  for (const Segment& s : corpus.segments) {
    if (!s.game) throw DataError("classifier training segment without a game");
    labels.push_back(*s.game);
  }
  return train_forest(corpus.segments, labels, corpus.vocab.size(), hyper);
}

ForestClassifier train_dir_classifier(const Corpus& corpus, const ForestHyper& hyper) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < corpus.segments.size(); ++i) {
    if (!corpus.segments[i].dir) throw MissingDirectionalLabel(static_cast<int>(i));
    labels.push_back(dir_to_index(*corpus.segments[i].dir));
  }
  return train_forest(corpus.segments, labels, corpus.vocab.size(), hyper);
}

std::vector<JumpModel> jumps_for(const JumpTable& table, const TileVocab& vocab) {
  std::vector<std::string> names;
  for (int g = 0; g < vocab.game_count(); ++g) names.push_back(vocab.game(g).name);
  return table.select(names);
}

nlohmann::json grid_to_json(const TileGrid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < grid.rows; ++r) {
    rows.push_back(std::vector<TileId>(grid.cells.begin() + r * grid.cols,
                                       grid.cells.begin() + (r + 1) * grid.cols));
  }
  return rows;
}

TileGrid grid_from_json(const nlohmann::json& j, std::size_t vocab_size) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw UsageError("grid must be a non-empty array of rows");
  }
  TileGrid g(static_cast<int>(j.size()), static_cast<int>(j[0].size()));
  for (int r = 0; r < g.rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != g.cols) throw UsageError("grid rows differ in length");
    for (int c = 0; c < g.cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() >= static_cast<long long>(vocab_size)) {
        throw UsageError("grid holds an unknown tile id");
      }
      g.at(r, c) = v.get<TileId>();
    }
  }
  return g;
}

}  // namespace gameblend
