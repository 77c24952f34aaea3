#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/agent.hpp"
#include "gameblend/blender.hpp"
#include "gameblend/corpus.hpp"
#include "gameblend/genmodels.hpp"

namespace gameblend {

enum class LayoutKind { kDungeon, kPlatformer };
std::string_view to_string(LayoutKind k);
LayoutKind layout_kind_from_string(std::string_view s);

// gy grows upward; open sides use the directional label order (U, D, L, R).
struct Location {
  int gx = 0;
  int gy = 0;
  DirLabel open{0, 0, 0, 0};
  bool operator==(const Location&) const = default;
};

struct Layout {
  LayoutKind kind = LayoutKind::kDungeon;
  std::vector<Location> locations;  // creation order

  std::optional<int> find(int gx, int gy) const;
  // Pairs of location indices that are adjacent with both facing sides open.
  std::vector<std::pair<int, int>> edges() const;
  bool connected() const;
  bool mirrored() const;  // facing sides of adjacent locations agree
  int min_gx() const;
  int max_gx() const;
  int min_gy() const;
  int max_gy() const;

  nlohmann::json to_json() const;
  static Layout from_json(const nlohmann::json& j);
  bool operator==(const Layout&) const = default;
};

// Grid step for a side.
int side_dx(Direction d);
int side_dy(Direction d);
Direction opposite(Direction d);

struct DungeonOptions {
  bool random_current = false;  // grow from a random existing room instead of the newest
  int max_redraws = 100;
};

Layout gen_dungeon_layout(int n, Rng& rng, const DungeonOptions& options = {});

struct PlatformerOptions {
  double up_probability = 0.5;
  std::optional<Direction> force;  // kUp or kRight for every step
};

Layout gen_platformer_layout(int n, Rng& rng, const PlatformerOptions& options = {});

struct WholeLevel {
  Layout layout;
  std::vector<Segment> segments;   // one per location, same order
  std::vector<std::uint64_t> seeds;  // per-location sampling seeds
  TileGrid grid;

  // Sidecar: locations, open sides and per-location seeds.
  nlohmann::json sidecar() const;
};

// Cell block of a location inside the stitched grid.
Cell location_origin(const Layout& layout, int index);

WholeLevel assemble(const Layout& layout, const ModelCheckpoint& model, const BlendWeights& w,
                    Rng& rng);

}  // namespace gameblend
