#include <algorithm>
#include <queue>

#include "gameblend/errors.hpp"
#include "gameblend/layout.hpp"

namespace gameblend {

std::string_view to_string(LayoutKind k) {
  return k == LayoutKind::kDungeon ? "dungeon" : "platformer";
}

LayoutKind layout_kind_from_string(std::string_view s) {
  if (s == "dungeon") return LayoutKind::kDungeon;
  if (s == "platformer") return LayoutKind::kPlatformer;
  throw UsageError("unknown layout kind '" + std::string(s) + "'");
}

int side_dx(Direction d) { return d == kLeft ? -1 : d == kRight ? 1 : 0; }
int side_dy(Direction d) { return d == kUp ? 1 : d == kDown ? -1 : 0; }

Direction opposite(Direction d) {
  switch (d) {
    case kUp: return kDown;
    case kDown: return kUp;
    case kLeft: return kRight;
    case kRight: return kLeft;
  }
  return kUp;
}

std::optional<int> Layout::find(int gx, int gy) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].gx == gx && locations[i].gy == gy) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<std::pair<int, int>> Layout::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Location& a = locations[i];
    for (Direction d : {kUp, kRight}) {
      auto j = find(a.gx + side_dx(d), a.gy + side_dy(d));
      if (j && a.open[d] && locations[static_cast<std::size_t>(*j)].open[opposite(d)]) {
        out.emplace_back(static_cast<int>(i), *j);
      }
    }
  }
  return out;
}

bool Layout::connected() const {
  if (locations.empty()) return false;
  std::vector<std::vector<int>> adj(locations.size());
  for (auto [a, b] : edges()) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<char> seen(locations.size(), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!todo.empty()) {
    const int i = todo.front();
    todo.pop();
    for (int j : adj[static_cast<std::size_t>(i)]) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        ++count;
        todo.push(j);
      }
    }
  }
  return count == locations.size();
}

bool Layout::mirrored() const {
  for (const Location& a : locations) {
    for (Direction d : {kUp, kDown, kLeft, kRight}) {
      auto j = find(a.gx + side_dx(d), a.gy + side_dy(d));
      if (j && a.open[d] != locations[static_cast<std::size_t>(*j)].open[opposite(d)]) return false;
    }
  }
  return true;
}

int Layout::min_gx() const {
  return std::min_element(locations.begin(), locations.end(),
                          [](auto& a, auto& b) { return a.gx < b.gx; })->gx;
}
int Layout::max_gx() const {
  return std::max_element(locations.begin(), locations.end(),
                          [](auto& a, auto& b) { return a.gx < b.gx; })->gx;
}
int Layout::min_gy() const {
  return std::min_element(locations.begin(), locations.end(),
                          [](auto& a, auto& b) { return a.gy < b.gy; })->gy;
}
int Layout::max_gy() const {
  return std::max_element(locations.begin(), locations.end(),
                          [](auto& a, auto& b) { return a.gy < b.gy; })->gy;
}

nlohmann::json Layout::to_json() const {
  nlohmann::json locs = nlohmann::json::array();
  for (const Location& l : locations) {
    locs.push_back({{"gx", l.gx}, {"gy", l.gy}, {"open", dir_to_string(l.open)}});
  }
  return {{"kind", to_string(kind)}, {"locations", locs}};
}

Layout Layout::from_json(const nlohmann::json& j) {
  Layout out;
  try {
    out.kind = layout_kind_from_string(j.at("kind").get<std::string>());
    for (const auto& l : j.at("locations")) {
      out.locations.push_back({l.at("gx").get<int>(), l.at("gy").get<int>(),
                               dir_from_string(l.at("open").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad layout: ") + e.what());
  }
  return out;
}

namespace {

template <class T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

void link(Layout& layout, int from, Direction d) {
  Location& a = layout.locations[static_cast<std::size_t>(from)];
  Location next{a.gx + side_dx(d), a.gy + side_dy(d), {0, 0, 0, 0}};
  a.open[d] = 1;
  next.open[opposite(d)] = 1;
  layout.locations.push_back(next);
}

std::vector<Direction> free_sides(const Layout& layout, int i) {
  const Location& a = layout.locations[static_cast<std::size_t>(i)];
  std::vector<Direction> out;
  for (Direction d : {kUp, kDown, kLeft, kRight}) {
    if (!a.open[d] && !layout.find(a.gx + side_dx(d), a.gy + side_dy(d))) out.push_back(d);
  }
  return out;
}

}  // namespace

Layout gen_dungeon_layout(int n, Rng& rng, const DungeonOptions& options) {
  if (n < 1) throw UsageError("layout needs at least one location");
  Layout layout;
  layout.kind = LayoutKind::kDungeon;
  layout.locations.push_back({0, 0, {0, 0, 0, 0}});
  int current = 0;
  while (static_cast<int>(layout.locations.size()) < n) {
    if (options.random_current) {
      std::uniform_int_distribution<int> dist(0, static_cast<int>(layout.locations.size()) - 1);
      current = dist(rng);
    }
    const Location& cur = layout.locations[static_cast<std::size_t>(current)];
    std::vector<Direction> closed;
    for (Direction d : {kUp, kDown, kLeft, kRight}) {
      if (!cur.open[d]) closed.push_back(d);
    }
    std::optional<Direction> side;
    for (int attempt = 0; attempt < options.max_redraws && !closed.empty() && !side; ++attempt) {
      const Direction d = pick(closed, rng);
      if (!layout.find(cur.gx + side_dx(d), cur.gy + side_dy(d))) side = d;
    }
    if (!side) {
      std::vector<Direction> free = free_sides(layout, current);
      if (!free.empty()) side = pick(free, rng);
    }
    if (!side) {
      // boxed in: continue from some room that still has room to grow
      std::vector<int> growable;
      for (int i = 0; i < static_cast<int>(layout.locations.size()); ++i) {
        if (!free_sides(layout, i).empty()) growable.push_back(i);
      }
      current = pick(growable, rng);
      side = pick(free_sides(layout, current), rng);
    }
    link(layout, current, *side);
    current = static_cast<int>(layout.locations.size()) - 1;
  }
  return layout;
}

Layout gen_platformer_layout(int n, Rng& rng, const PlatformerOptions& options) {
  if (n < 1) throw UsageError("layout needs at least one location");
  if (options.force && *options.force != kUp && *options.force != kRight) {
    throw UsageError("platformer layouts only progress up or right");
  }
  Layout layout;
  layout.kind = LayoutKind::kPlatformer;
  layout.locations.push_back({0, 0, {0, 0, 0, 0}});
  std::bernoulli_distribution up(options.up_probability);
  for (int i = 0; i < n; ++i) {
    const Direction exit = options.force ? *options.force : (up(rng) ? kUp : kRight);
    if (i + 1 < n) {
      link(layout, i, exit);
    } else {
      layout.locations[static_cast<std::size_t>(i)].open[exit] = 1;
    }
  }
  return layout;
}

nlohmann::json WholeLevel::sidecar() const {
  nlohmann::json j = layout.to_json();
  for (std::size_t i = 0; i < seeds.size(); ++i) j["locations"][i]["seed"] = seeds[i];
  j["rows"] = grid.rows;
  j["cols"] = grid.cols;
  return j;
}

Cell location_origin(const Layout& layout, int index) {
  const Location& l = layout.locations.at(static_cast<std::size_t>(index));
  return {(layout.max_gy() - l.gy) * kSegmentRows, (l.gx - layout.min_gx()) * kSegmentCols};
}

WholeLevel assemble(const Layout& layout, const ModelCheckpoint& model, const BlendWeights& w,
                    Rng& rng) {
  if (!is_directional(model.config.family)) {
    throw FamilyMismatch("whole levels need a cgmvae or ccvae checkpoint");
  }
  WholeLevel level;
  level.layout = layout;
  const int height = (layout.max_gy() - layout.min_gy() + 1) * kSegmentRows;
  const int width = (layout.max_gx() - layout.min_gx() + 1) * kSegmentCols;
  level.grid = TileGrid(height, width, model.vocab.solid_tile());
  for (std::size_t i = 0; i < layout.locations.size(); ++i) {
    const std::uint64_t seed = rng();
    Rng local(seed);
    std::vector<Segment> s = sample_blend(model, w, 1, layout.locations[i].open, local);
    const Cell origin = location_origin(layout, static_cast<int>(i));
    level.grid.paste(s.front().grid, origin.row, origin.col);
    level.segments.push_back(std::move(s.front()));
    level.seeds.push_back(seed);
  }
  return level;
}

}  // namespace gameblend
