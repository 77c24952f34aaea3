#include "gameblend/blender.hpp"
#include "gameblend/errors.hpp"
#include "gameblend/layout.hpp"
#include "gameblend/workbench.hpp"

namespace gameblend {

namespace {

using json = nlohmann::json;

constexpr int kMaxCount = 10000;
constexpr int kMaxLocations = 200;

struct NotFound : Error {
  using Error::Error;
};

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

BlendWeights weights_of(const json& request, int k) {
  if (!request.contains("weights") || !request["weights"].is_array()) {
    throw UsageError("weights must be an array of numbers");
  }
  BlendWeights w(request["weights"].get<std::vector<double>>());
  if (w.size() != k) {
    throw BadLength("expected " + std::to_string(k) + " weights, got " + std::to_string(w.size()));
  }
  return w;
}

std::optional<DirLabel> dir_of(const json& request) {
  if (!request.contains("dir") || request["dir"].is_null()) return std::nullopt;
  const json& d = request["dir"];
  if (d.is_string()) {
    try {
      return dir_from_string(d.get<std::string>());
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  const auto bits = d.get<std::vector<int>>();
  if (bits.size() != 4) throw UsageError("dir needs 4 bits");
  DirLabel out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw UsageError("dir bits must be 0 or 1");
    out[i] = static_cast<std::uint8_t>(bits[i]);
  }
  return out;
}

std::uint64_t seed_of(const json& request) { return request.value("seed", std::uint64_t{0}); }

std::vector<JumpArc> arcs_for(const LoadedModel& m, const BlendWeights& w) {
  if (!m.jumps) throw FamilyMismatch("no jump parameters loaded for this model's games");
  return jump_arcs(blend_jump(*m.jumps, w));
}

}  // namespace

Service::Service(std::shared_ptr<const Session> session) : session_(std::move(session)) {
  if (!session_ || session_->models.empty()) throw UsageError("the service needs at least one model");
}

const LoadedModel& Service::model(const json& request) const {
  if (!request.contains("model")) {
    // A lone model is the implicit default.
    if (session_->models.size() == 1) return session_->models.begin()->second;
    throw UsageError("request needs a model id");
  }
  const std::string id = request.at("model").get<std::string>();
  auto it = session_->models.find(id);
  if (it == session_->models.end()) throw NotFound("unknown model '" + id + "'");
  return it->second;
}

Response Service::models() const {
  json out = json::array();
  for (const auto& [id, m] : session_->models) {
    const ModelConfig& c = m.checkpoint.config;
    json games = json::array();
    for (int g = 0; g < m.checkpoint.vocab.game_count(); ++g) games.push_back(m.checkpoint.vocab.game(g).name);
    out.push_back({{"id", id},
                   {"family", to_string(c.family)},
                   {"k", c.k},
                   {"z", c.z},
                   {"games", games},
                   {"classifier", m.classifier.has_value()},
                   {"jumps", m.jumps.has_value()}});
  }
  return {200, {{"models", out}}};
}

Response Service::vocab(const std::map<std::string, std::string>& query) const {
  json request = json::object();
  if (auto it = query.find("model"); it != query.end()) request["model"] = it->second;
  if (!request.contains("model")) request["model"] = session_->models.begin()->first;
  const TileVocab& v = model(request).checkpoint.vocab;
  json tiles = json::array();
  for (std::size_t id = 0; id < v.size(); ++id) {
    const TileInfo& t = v.tile(static_cast<TileId>(id));
    tiles.push_back({{"id", id},
                     {"game", v.game(t.game).name},
                     {"char", std::string(1, t.symbol)},
                     {"glyph", std::string(1, t.glyph)},
                     {"name", t.name},
                     {"affordance", to_string(t.affordance)},
                     {"door", t.door},
                     {"color", t.color}});
  }
  return {200, {{"model", request["model"]}, {"tiles", tiles}}};
}

Response Service::sample(const json& request) const {
  const LoadedModel& m = model(request);
  const ModelCheckpoint& ck = m.checkpoint;
  const BlendWeights w = weights_of(request, ck.config.k);
  const int count = request.value("count", 1);
  if (count < 0 || count > kMaxCount) throw UsageError("count must be in [0, " + std::to_string(kMaxCount) + "]");
  const auto dir = dir_of(request);
  const std::uint64_t seed = seed_of(request);
  Rng rng(seed);
  const auto segments = sample_blend(ck, w, count, dir, rng);

  std::optional<FeatureMatrix> features;
  if (m.classifier && !segments.empty()) features = segment_features(segments, ck.vocab.size());
  json out = json::array();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    json s{{"tiles", grid_to_json(segments[i].grid)}, {"text", render_glyphs(segments[i].grid, ck.vocab)}};
    if (features) {
      std::vector<double> p = m.classifier->predict_proba(*features, static_cast<int>(i));
      for (double& x : p) x *= 100.0;
      s["percentages"] = p;
    } else {
      s["percentages"] = nullptr;
    }
    out.push_back(std::move(s));
  }
  json body{{"weights", w.label()}, {"seed", seed}, {"segments", out}};
  body["dir"] = dir ? json(dir_to_string(*dir)) : json(nullptr);
  return {200, body};
}

Response Service::layout(const json& request) const {
  const LoadedModel& m = model(request);
  const ModelCheckpoint& ck = m.checkpoint;
  const BlendWeights w = weights_of(request, ck.config.k);
  if (!is_directional(ck.config.family)) throw FamilyMismatch("layouts need a cgmvae or ccvae model");
  const LayoutKind kind = layout_kind_from_string(request.value("kind", std::string("dungeon")));
  const int n = request.value("n", 4);
  if (n < 1 || n > kMaxLocations) throw UsageError("n must be in [1, " + std::to_string(kMaxLocations) + "]");
  const std::uint64_t seed = seed_of(request);
  Rng rng(seed);
  const Layout l = kind == LayoutKind::kDungeon ? gen_dungeon_layout(n, rng) : gen_platformer_layout(n, rng);
  const WholeLevel level = assemble(l, ck, w, rng);

  std::optional<std::vector<JumpArc>> arcs;
  if (m.jumps) arcs = arcs_for(m, w);
  json rooms = json::array();
  for (std::size_t i = 0; i < level.segments.size(); ++i) {
    json r{{"index", i}, {"dir", dir_to_string(l.locations[i].open)}};
    r["playable"] = arcs ? json(gameblend::playability(level.segments[i].grid, ck.vocab, *arcs)) : json(nullptr);
    rooms.push_back(std::move(r));
  }
  return {200,
          {{"seed", seed},
           {"weights", w.label()},
           {"grid", grid_to_json(level.grid)},
           {"text", render_glyphs(level.grid, ck.vocab)},
           {"layout", level.sidecar()},
           {"rooms", rooms}}};
}

Response Service::playability(const json& request) const {
  const LoadedModel& m = model(request);
  const ModelCheckpoint& ck = m.checkpoint;
  const BlendWeights w = weights_of(request, ck.config.k);
  if (!request.contains("grid")) throw UsageError("request needs a grid");
  const TileGrid grid = grid_from_json(request["grid"], ck.vocab.size());
  const auto arcs = arcs_for(m, w);
  const Playability p = evaluate_playability(to_affordances(grid, ck.vocab), arcs);
  return {200,
          {{"playable", p.playable()},
           {"left_to_right", p.left_to_right.to_json()},
           {"bottom_to_top", p.bottom_to_top.to_json()}}};
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& query) const {
  try {
    if (path == "/models" || path == "/vocab") {
      if (method != "GET") return error(405, "use GET for " + path);
      return path == "/models" ? models() : vocab(query);
    }
    if (path == "/sample" || path == "/layout" || path == "/playability") {
      if (method != "POST") return error(405, "use POST for " + path);
      const json request = json::parse(body.empty() ? std::string("{}") : body);
      if (!request.is_object()) return error(400, "request body must be a JSON object");
      if (path == "/sample") return sample(request);
      if (path == "/layout") return layout(request);
      return playability(request);
    }
    return error(404, "no such endpoint " + path);
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const FamilyMismatch& e) {
    return error(422, e.what());
  } catch (const MissingDirection& e) {
    return error(422, e.what());
  } catch (const UsageError& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request: ") + e.what());
  } catch (const DataError& e) {
    return error(422, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

}  // namespace gameblend
