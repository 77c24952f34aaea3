#include <algorithm>
#include <cstdlib>
#include <map>
#include <queue>
#include <tuple>

#include "gameblend/agent.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

namespace {

bool blocked(Affordance a) { return a == Affordance::kSolid; }
bool enterable(Affordance a) { return a == Affordance::kPassable || a == Affordance::kClimbable; }

char affordance_char(Affordance a) {
  switch (a) {
    case Affordance::kSolid: return 'X';
    case Affordance::kHazard: return '^';
    case Affordance::kPassable: return '-';
    case Affordance::kClimbable: return 'H';
  }
  return '?';
}

}  // namespace

AffordanceGrid AffordanceGrid::parse(std::string_view text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw BadShape("empty affordance grid");
  AffordanceGrid g(static_cast<int>(lines.size()), static_cast<int>(lines.front().size()));
  for (int r = 0; r < g.rows; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != g.cols) throw RaggedRows(r);
    for (int c = 0; c < g.cols; ++c) {
      switch (line[static_cast<std::size_t>(c)]) {
        case 'X': g.at(r, c) = Affordance::kSolid; break;
        case '^': g.at(r, c) = Affordance::kHazard; break;
        case '-': g.at(r, c) = Affordance::kPassable; break;
        case 'H': g.at(r, c) = Affordance::kClimbable; break;
        default: throw UnknownTile(line[static_cast<std::size_t>(c)], r, c);
      }
    }
  }
  return g;
}

std::string AffordanceGrid::render() const {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back(affordance_char(at(r, c)));
    out.push_back('\n');
  }
  return out;
}

AffordanceGrid to_affordances(const TileGrid& grid, const TileVocab& vocab) {
  AffordanceGrid g(grid.rows, grid.cols);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) g.cells[i] = vocab.affordance(grid.cells[i]);
  return g;
}

std::string_view to_string(TraversalDir d) {
  return d == TraversalDir::kLeftToRight ? "left-to-right" : "bottom-to-top";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kStart: return "start";
    case Action::kWalk: return "walk";
    case Action::kClimb: return "climb";
    case Action::kJump: return "jump";
    case Action::kFall: return "fall";
  }
  return "?";
}

bool supported(const AffordanceGrid& g, int r, int c) {
  if (g.at(r, c) == Affordance::kClimbable) return true;
  if (r + 1 >= g.rows) return false;
  const Affordance below = g.at(r + 1, c);
  return below == Affordance::kSolid || below == Affordance::kClimbable;
}

bool can_stand(const AffordanceGrid& g, int r, int c) {
  return g.in_bounds(r, c) && enterable(g.at(r, c)) && supported(g, r, c);
}

std::optional<StartGoal> find_start_goal(const AffordanceGrid& g, TraversalDir dir) {
  StartGoal sg;
  if (dir == TraversalDir::kLeftToRight) {
    for (int r = 0; r < g.rows; ++r) {
      if (can_stand(g, r, 0)) sg.starts.push_back({r, 0});
      if (can_stand(g, r, g.cols - 1)) sg.goals.push_back({r, g.cols - 1});
    }
  } else {
    for (int c = 0; c < g.cols; ++c) {
      if (can_stand(g, g.rows - 1, c)) sg.starts.push_back({g.rows - 1, c});
      if (can_stand(g, 0, c)) sg.goals.push_back({0, c});
    }
  }
  if (sg.starts.empty() || sg.goals.empty()) return std::nullopt;
  return sg;
}

namespace {

int move_cost(Cell a, Cell b) {
  return std::max(1, std::abs(a.row - b.row) + std::abs(a.col - b.col));
}

// Follows one arc mirrored by `sign` (-1, 0, +1). Returns the resting cell,
// or nothing when the jump touches a hazard or never leaves the origin.
std::optional<Cell> trace_jump(const AffordanceGrid& g, Cell origin, const JumpArc& arc, int sign) {
  Cell last = origin;
  int px = 0, py = 0;
  for (const JumpOffset& o : arc) {
    const int tx = o.dx * sign, ty = o.dy;
    const bool descending = ty < py;
    const int steps = std::max(std::abs(tx - px), std::abs(ty - py));
    for (int i = 1; i <= steps; ++i) {
      const int x = px + static_cast<int>(std::lround(double(tx - px) * i / steps));
      const int y = py + static_cast<int>(std::lround(double(ty - py) * i / steps));
      const Cell cell{origin.row - y, origin.col + x};
      if (cell == last) continue;
      // head bump or wall: the jump ends where it is and gravity takes over
      if (!g.in_bounds(cell.row, cell.col) || blocked(g.at(cell.row, cell.col))) {
        return last == origin ? std::nullopt : std::optional<Cell>(last);
      }
      const Affordance a = g.at(cell.row, cell.col);
      if (a == Affordance::kHazard) return std::nullopt;
      last = cell;
      if (a == Affordance::kClimbable) return last;
      if (descending && supported(g, cell.row, cell.col)) return last;
    }
    px = tx;
    py = ty;
  }
  return last == origin ? std::nullopt : std::optional<Cell>(last);
}

void add_move(std::vector<Move>& out, Cell from, Cell to, Action action) {
  for (const Move& m : out) {
    if (m.to == to && m.action == action) return;
  }
  out.push_back({to, action, move_cost(from, to)});
}

}  // namespace

std::vector<Move> successors(const AffordanceGrid& g, Cell from, const std::vector<JumpArc>& arcs) {
  std::vector<Move> out;
  const int r = from.row, c = from.col;
  auto free_cell = [&](int rr, int cc) { return g.in_bounds(rr, cc) && enterable(g.at(rr, cc)); };

  if (!supported(g, r, c)) {
    // below the bottom row is a fatal fall: no successor
    for (int d : {0, -1, 1}) {
      if (!free_cell(r + 1, c + d)) continue;
      if (d != 0 && !free_cell(r, c + d)) continue;  // no cutting solid corners
      add_move(out, from, {r + 1, c + d}, Action::kFall);
    }
    return out;
  }

  for (int d : {-1, 1}) {
    if (free_cell(r, c + d)) add_move(out, from, {r, c + d}, Action::kWalk);
  }
  const bool on_ladder = g.at(r, c) == Affordance::kClimbable;
  if (on_ladder && free_cell(r - 1, c)) add_move(out, from, {r - 1, c}, Action::kClimb);
  if (free_cell(r + 1, c) && (on_ladder || g.at(r + 1, c) == Affordance::kClimbable)) {
    add_move(out, from, {r + 1, c}, Action::kClimb);
  }
  for (const JumpArc& arc : arcs) {
    for (int sign : {-1, 0, 1}) {
      if (auto to = trace_jump(g, from, arc, sign)) add_move(out, from, *to, Action::kJump);
    }
  }
  return out;
}

nlohmann::json PathResult::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const PathStep& s : path) {
    steps.push_back({{"row", s.cell.row}, {"col", s.cell.col}, {"action", to_string(s.action)}});
  }
  return {{"playable", playable}, {"direction", to_string(direction)}, {"path", steps}};
}

PathResult astar(const AffordanceGrid& g, const std::vector<JumpArc>& arcs, TraversalDir dir) {
  if (arcs.empty()) throw UsageError("astar needs at least one jump arc");
  PathResult result;
  result.direction = dir;
  const auto sg = find_start_goal(g, dir);
  if (!sg) return result;

  std::vector<char> is_goal(g.cells.size(), 0);
  for (Cell c : sg->goals) is_goal[static_cast<std::size_t>(c.row * g.cols + c.col)] = 1;
  auto index = [&](Cell c) { return static_cast<std::size_t>(c.row * g.cols + c.col); };
  auto heuristic = [&](Cell c) {
    return dir == TraversalDir::kLeftToRight ? g.cols - 1 - c.col : c.row;
  };

  constexpr int kUnseen = -1;
  std::vector<int> best(g.cells.size(), kUnseen);
  std::vector<int> parent(g.cells.size(), -1);
  std::vector<Action> via(g.cells.size(), Action::kStart);
  std::vector<char> closed(g.cells.size(), 0);
  // (f, g, row, col): ties resolve toward lower cost then top-left cells
  using Entry = std::tuple<int, int, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (Cell s : sg->starts) {
    best[index(s)] = 0;
    open.emplace(heuristic(s), 0, s.row, s.col);
  }
  while (!open.empty()) {
    const auto [f, cost, row, col] = open.top();
    open.pop();
    const Cell cur{row, col};
    const std::size_t ci = index(cur);
    if (closed[ci] || cost != best[ci]) continue;
    closed[ci] = 1;
    if (is_goal[ci]) {
      for (int i = static_cast<int>(ci); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
        result.path.push_back({{i / g.cols, i % g.cols}, via[static_cast<std::size_t>(i)]});
      }
      std::reverse(result.path.begin(), result.path.end());
      result.playable = true;
      return result;
    }
    for (const Move& m : successors(g, cur, arcs)) {
      const std::size_t ni = index(m.to);
      const int ng = cost + m.cost;
      if (closed[ni] || (best[ni] != kUnseen && best[ni] <= ng)) continue;
      best[ni] = ng;
      parent[ni] = static_cast<int>(ci);
      via[ni] = m.action;
      open.emplace(ng + heuristic(m.to), ng, m.to.row, m.to.col);
    }
  }
  return result;
}

Playability evaluate_playability(const AffordanceGrid& g, const std::vector<JumpArc>& arcs) {
  return {astar(g, arcs, TraversalDir::kLeftToRight), astar(g, arcs, TraversalDir::kBottomToTop)};
}

bool playability(const TileGrid& grid, const TileVocab& vocab, const std::vector<JumpArc>& arcs) {
  const AffordanceGrid g = to_affordances(grid, vocab);
  return astar(g, arcs, TraversalDir::kLeftToRight).playable ||
         astar(g, arcs, TraversalDir::kBottomToTop).playable;
}

}  // namespace gameblend
