#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/corpus.hpp"
#include "gameblend/mechanics.hpp"

namespace gameblend {

struct AffordanceGrid {
  int rows = 0;
  int cols = 0;
  std::vector<Affordance> cells;

  AffordanceGrid() = default;
  AffordanceGrid(int rows, int cols, Affordance fill = Affordance::kPassable)
      : rows(rows), cols(cols), cells(static_cast<std::size_t>(rows) * cols, fill) {}

  Affordance at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  Affordance& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }

  // One char per cell: X solid, ^ hazard, - passable, H climbable.
  static AffordanceGrid parse(std::string_view text);
  std::string render() const;
};

AffordanceGrid to_affordances(const TileGrid& grid, const TileVocab& vocab);

enum class TraversalDir { kLeftToRight, kBottomToTop };
std::string_view to_string(TraversalDir d);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

// Solid or climbable below, or standing on a climbable. Below the bottom row
// there is nothing.
bool supported(const AffordanceGrid& g, int r, int c);
// Passable or climbable, and supported.
bool can_stand(const AffordanceGrid& g, int r, int c);

struct StartGoal {
  std::vector<Cell> starts;
  std::vector<Cell> goals;
};

// Empty optional when either set is empty.
std::optional<StartGoal> find_start_goal(const AffordanceGrid& g, TraversalDir dir);

enum class Action { kStart, kWalk, kClimb, kJump, kFall };
std::string_view to_string(Action a);

struct Move {
  Cell to;
  Action action;
  int cost = 1;  // |drow| + |dcol|, at least 1
};

// Every legal move from `from`. Supported cells walk, climb and jump;
// unsupported cells only fall.
std::vector<Move> successors(const AffordanceGrid& g, Cell from, const std::vector<JumpArc>& arcs);

struct PathStep {
  Cell cell;
  Action action = Action::kStart;
};

struct PathResult {
  bool playable = false;
  TraversalDir direction = TraversalDir::kLeftToRight;
  std::vector<PathStep> path;
  nlohmann::json to_json() const;
};

// Multi-source A*; heuristic is the row/column distance to the goal line.
PathResult astar(const AffordanceGrid& g, const std::vector<JumpArc>& arcs, TraversalDir dir);

struct Playability {
  PathResult left_to_right;
  PathResult bottom_to_top;
  bool playable() const { return left_to_right.playable || bottom_to_top.playable; }
};

Playability evaluate_playability(const AffordanceGrid& g, const std::vector<JumpArc>& arcs);
bool playability(const TileGrid& grid, const TileVocab& vocab, const std::vector<JumpArc>& arcs);

}  // namespace gameblend
