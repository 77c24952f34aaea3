#pragma once

// Brute-force reachability over the agent's move relation. No heuristic,
// no costs: a plain breadth-first flood from every start cell.

#include <queue>

#include "gameblend/agent.hpp"

namespace oracle {

inline bool bfs_reachable(const gameblend::AffordanceGrid& g,
                          const std::vector<gameblend::JumpArc>& arcs, gameblend::TraversalDir dir) {
  using namespace gameblend;
  const auto sg = find_start_goal(g, dir);
  if (!sg) return false;
  std::vector<char> seen(g.cells.size(), 0);
  std::vector<char> goal(g.cells.size(), 0);
  for (Cell c : sg->goals) goal[static_cast<std::size_t>(c.row * g.cols + c.col)] = 1;
  std::queue<Cell> todo;
  for (Cell s : sg->starts) {
    seen[static_cast<std::size_t>(s.row * g.cols + s.col)] = 1;
    todo.push(s);
  }
  while (!todo.empty()) {
    const Cell c = todo.front();
    todo.pop();
    if (goal[static_cast<std::size_t>(c.row * g.cols + c.col)]) return true;
    for (const Move& m : successors(g, c, arcs)) {
      auto& s = seen[static_cast<std::size_t>(m.to.row * g.cols + m.to.col)];
      if (!s) {
        s = 1;
        todo.push(m.to);
      }
    }
  }
  return false;
}

// Random grid with the given affordance mix, plus a solid floor on the
// bottom row when `floor` is set.
inline gameblend::AffordanceGrid random_grid(gameblend::Rng& rng, double solid, double hazard,
                                             double climb, bool floor) {
  using namespace gameblend;
  AffordanceGrid g(kSegmentRows, kSegmentCols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& a : g.cells) {
    const double x = u(rng);
    a = x < solid                    ? Affordance::kSolid
        : x < solid + hazard         ? Affordance::kHazard
        : x < solid + hazard + climb ? Affordance::kClimbable
                                     : Affordance::kPassable;
  }
  if (floor) {
    for (int c = 0; c < g.cols; ++c) g.at(g.rows - 1, c) = Affordance::kSolid;
  }
  return g;
}

}  // namespace oracle
