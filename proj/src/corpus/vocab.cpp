#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include "gameblend/corpus.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

namespace {

constexpr std::array<const char*, 4> kAffordanceNames = {"solid", "hazard", "passable",
                                                         "climbable"};

// Base hue per game for auto-assigned display colors.
constexpr std::array<std::array<int, 3>, 8> kGamePalette = {{
    {196, 98, 16},   // brown
    {40, 110, 200},  // blue
    {230, 140, 20},  // orange
    {30, 40, 120},   // dark blue
    {40, 150, 60},   // green
    {150, 60, 160},  // purple
    {200, 40, 40},   // red
    {120, 120, 120},
}};

std::string hex_color(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", std::clamp(r, 0, 255), std::clamp(g, 0, 255),
                std::clamp(b, 0, 255));
  return buf;
}

std::string default_color(GameId game, Affordance a) {
  const auto& base = kGamePalette[static_cast<std::size_t>(game) % kGamePalette.size()];
  switch (a) {
    case Affordance::kPassable:
      return hex_color(235 - base[0] / 8, 235 - base[1] / 8, 235 - base[2] / 8);
    case Affordance::kHazard:
      return hex_color(base[0] / 2 + 128, base[1] / 4, base[2] / 4);
    case Affordance::kClimbable:
      return hex_color(base[0] / 2 + 60, base[1] / 2 + 90, base[2] / 2 + 30);
    case Affordance::kSolid:
      break;
  }
  return hex_color(base[0], base[1], base[2]);
}

TileInfo tile_from_json(char symbol, const nlohmann::json& t) {
  TileInfo info;
  info.symbol = symbol;
  if (t.is_string()) {
    info.affordance = affordance_from_string(t.get<std::string>());
    return info;
  }
  info.affordance = affordance_from_string(t.at("affordance").get<std::string>());
  info.name = t.value("name", "");
  info.door = t.value("door", false);
  info.color = t.value("color", "");
  const std::string glyph = t.value("glyph", "");
  info.glyph = glyph.empty() ? '\0' : glyph[0];
  return info;
}

char single_char(const std::string& s, const char* what) {
  if (s.size() != 1) throw DataError(std::string(what) + " must be a single character: '" + s + "'");
  return s[0];
}

}  // namespace

std::string_view to_string(Affordance a) {
  return kAffordanceNames[static_cast<std::size_t>(a)];
}

Affordance affordance_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kAffordanceNames.size(); ++i) {
    if (s == kAffordanceNames[i]) return static_cast<Affordance>(i);
  }
  throw DataError("unknown affordance '" + std::string(s) + "'");
}

GameId TileVocab::add_game(std::string name, char background, const std::vector<TileInfo>& tiles) {
  const GameId game = game_count();
  GameInfo info;
  info.name = std::move(name);
  if (find_game(info.name)) throw DataError("duplicate game '" + info.name + "'");

  std::set<char> used_glyphs;
  for (const auto& t : tiles_) used_glyphs.insert(t.glyph);
  std::set<char> seen_symbols;
  bool have_background = false;

  for (TileInfo t : tiles) {
    if (t.symbol == '\n' || t.symbol == '\r') throw DataError("newline cannot be a tile");
    if (!seen_symbols.insert(t.symbol).second) {
      throw DataError("duplicate tile '" + std::string(1, t.symbol) + "' in game " + info.name);
    }
    t.game = game;
    if (t.color.empty()) t.color = default_color(game, t.affordance);
    if (t.glyph == '\0' || used_glyphs.count(t.glyph)) {
      t.glyph = '\0';
      if (!used_glyphs.count(t.symbol)) {
        t.glyph = t.symbol;
      } else {
        for (char c = '!'; c <= '~'; ++c) {
          if (!used_glyphs.count(c)) {
            t.glyph = c;
            break;
          }
        }
      }
      if (t.glyph == '\0') throw DataError("vocabulary exceeds the printable glyph range");
    }
    used_glyphs.insert(t.glyph);
    const auto id = static_cast<TileId>(tiles_.size());
    if (t.symbol == background) {
      info.background = id;
      have_background = true;
    }
    info.tiles.push_back(id);
    tiles_.push_back(std::move(t));
  }
  if (!have_background) {
    throw DataError("background '" + std::string(1, background) + "' not listed for game " +
                    info.name);
  }
  games_.push_back(std::move(info));
  return game;
}

TileVocab TileVocab::from_json(const nlohmann::json& j) {
  TileVocab vocab;
  for (const auto& g : j.at("games")) {
    std::vector<TileInfo> tiles;
    const auto& jt = g.at("tiles");
    if (jt.is_array()) {
      for (const auto& t : jt) {
        tiles.push_back(tile_from_json(single_char(t.at("char").get<std::string>(), "tile char"), t));
      }
    } else {
      for (auto it = jt.begin(); it != jt.end(); ++it) {
        tiles.push_back(tile_from_json(single_char(it.key(), "tile char"), it.value()));
      }
    }
    vocab.add_game(g.at("name").get<std::string>(),
                   single_char(g.at("background").get<std::string>(), "background"), tiles);
  }
  return vocab;
}

TileVocab TileVocab::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_text_file(path), nullptr, true, true));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("vocabulary " + path.string() + ": " + e.what());
  }
}

nlohmann::json TileVocab::to_json() const {
  nlohmann::json games = nlohmann::json::array();
  for (const auto& g : games_) {
    nlohmann::json tiles = nlohmann::json::array();
    for (TileId id : g.tiles) {
      const auto& t = tiles_[id];
      tiles.push_back({{"char", std::string(1, t.symbol)},
                       {"name", t.name},
                       {"affordance", std::string(to_string(t.affordance))},
                       {"door", t.door},
                       {"color", t.color},
                       {"glyph", std::string(1, t.glyph)}});
    }
    games.push_back({{"name", g.name},
                     {"background", std::string(1, tiles_[g.background].symbol)},
                     {"tiles", std::move(tiles)}});
  }
  return {{"games", std::move(games)}};
}

std::optional<TileId> TileVocab::lookup(GameId game, char symbol) const {
  if (game < 0 || game >= game_count()) return std::nullopt;
  for (TileId id : games_[static_cast<std::size_t>(game)].tiles) {
    if (tiles_[id].symbol == symbol) return id;
  }
  return std::nullopt;
}

std::optional<TileId> TileVocab::from_glyph(char glyph) const {
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i].glyph == glyph) return static_cast<TileId>(i);
  }
  return std::nullopt;
}

std::optional<GameId> TileVocab::find_game(std::string_view name) const {
  for (std::size_t i = 0; i < games_.size(); ++i) {
    if (games_[i].name == name) return static_cast<GameId>(i);
  }
  return std::nullopt;
}

TileId TileVocab::solid_tile(GameId preferred) const {
  if (preferred >= 0 && preferred < game_count()) {
    for (TileId id : games_[static_cast<std::size_t>(preferred)].tiles) {
      if (tiles_[id].affordance == Affordance::kSolid) return id;
    }
  }
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i].affordance == Affordance::kSolid) return static_cast<TileId>(i);
  }
  throw DataError("vocabulary has no solid tile");
}

}  // namespace gameblend
