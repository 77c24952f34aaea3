#include <algorithm>

#include "../oracles/reachability.hpp"
#include "doctest.h"
#include "gameblend/agent.hpp"
#include "gameblend/errors.hpp"

using namespace gameblend;

namespace {

// Rise 2, reach 4.
const std::vector<JumpArc> kLowJump = {derive_arc({1.5, 1.0, 1.0, 0, 1.0})};
// Rise 6 with held frames.
const std::vector<JumpArc> kHighJump = {derive_arc({1.0, 0.2, 0.3, 3, 0.8})};

AffordanceGrid flat_floor() {
  AffordanceGrid g(15, 16);
  for (int c = 0; c < 16; ++c) g.at(14, c) = Affordance::kSolid;
  return g;
}

bool legal_path(const AffordanceGrid& g, const PathResult& r, const std::vector<JumpArc>& arcs) {
  if (r.path.empty()) return false;
  for (std::size_t i = 1; i < r.path.size(); ++i) {
    const auto moves = successors(g, r.path[i - 1].cell, arcs);
    const bool ok = std::any_of(moves.begin(), moves.end(), [&](const Move& m) {
      return m.to == r.path[i].cell && m.action == r.path[i].action;
    });
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("low jump arc has rise 2") {
  int apex = 0;
  for (auto o : kLowJump[0]) apex = std::max(apex, o.dy);
  CHECK(apex == 2);
}

TEST_CASE("affordance lookup") {
  const TileVocab v = make_synthetic_vocab(1);
  const AffordanceGrid g = to_affordances(TileGrid(15, 16, v.game(0).background), v);
  CHECK(std::all_of(g.cells.begin(), g.cells.end(), [](Affordance a) { return a == Affordance::kPassable; }));
  CHECK(to_affordances(TileGrid(1, 1, *v.lookup(0, 'H')), v).at(0, 0) == Affordance::kClimbable);
  CHECK(AffordanceGrid::parse(flat_floor().render()).cells == flat_floor().cells);
}

TEST_CASE("start and goal detection") {
  const auto sg = find_start_goal(flat_floor(), TraversalDir::kLeftToRight);
  REQUIRE(sg);
  CHECK(sg->starts == std::vector<Cell>{{13, 0}});
  CHECK(sg->goals == std::vector<Cell>{{13, 15}});

  CHECK_FALSE(find_start_goal(AffordanceGrid(15, 16, Affordance::kSolid), TraversalDir::kLeftToRight));
  CHECK_FALSE(find_start_goal(AffordanceGrid(15, 16, Affordance::kSolid), TraversalDir::kBottomToTop));

  AffordanceGrid h = flat_floor();
  for (int r = 0; r < 14; ++r) h.at(r, 0) = Affordance::kHazard;
  CHECK_FALSE(find_start_goal(h, TraversalDir::kLeftToRight));
}

TEST_CASE("flat floor is playable left to right") {
  for (const auto& arcs : {kLowJump, kHighJump}) {
    const PathResult r = astar(flat_floor(), arcs, TraversalDir::kLeftToRight);
    CHECK(r.playable);
    CHECK(r.path.front().cell == Cell{13, 0});
    CHECK(r.path.back().cell == Cell{13, 15});
    CHECK(legal_path(flat_floor(), r, arcs));
  }
  CHECK_THROWS_AS(astar(flat_floor(), {}, TraversalDir::kLeftToRight), UsageError);
}

TEST_CASE("a four-tile wall stops a rise-2 jump") {
  AffordanceGrid g = flat_floor();
  for (int r = 10; r < 14; ++r) g.at(r, 8) = Affordance::kSolid;
  CHECK_FALSE(astar(g, kLowJump, TraversalDir::kLeftToRight).playable);
  CHECK_FALSE(oracle::bfs_reachable(g, kLowJump, TraversalDir::kLeftToRight));
  // the higher jump clears it
  CHECK(astar(g, kHighJump, TraversalDir::kLeftToRight).playable);
  CHECK(oracle::bfs_reachable(g, kHighJump, TraversalDir::kLeftToRight));
  // a two-tile wall is fine for the low jump
  for (int r = 10; r < 12; ++r) g.at(r, 8) = Affordance::kPassable;
  CHECK(astar(g, kLowJump, TraversalDir::kLeftToRight).playable);
}

TEST_CASE("gaps and hazards") {
  AffordanceGrid g = flat_floor();
  g.at(14, 7) = g.at(14, 8) = Affordance::kPassable;  // pit falls off the bottom
  CHECK(astar(g, kLowJump, TraversalDir::kLeftToRight).playable);
  for (int c = 4; c < 12; ++c) g.at(14, c) = Affordance::kPassable;  // too wide
  CHECK_FALSE(astar(g, kLowJump, TraversalDir::kLeftToRight).playable);

  AffordanceGrid s = flat_floor();
  for (int r = 0; r < 14; ++r) s.at(r, 8) = Affordance::kHazard;  // hazard column
  CHECK_FALSE(astar(s, kHighJump, TraversalDir::kLeftToRight).playable);
}

TEST_CASE("a ladder shaft is playable bottom to top") {
  AffordanceGrid g(15, 16, Affordance::kSolid);
  for (int r = 0; r < 15; ++r) g.at(r, 7) = Affordance::kClimbable;
  const PathResult r = astar(g, kLowJump, TraversalDir::kBottomToTop);
  CHECK(r.playable);
  CHECK(r.path.front().cell == Cell{14, 7});
  CHECK(r.path.back().cell.row == 0);
  CHECK(legal_path(g, r, kLowJump));
  CHECK(evaluate_playability(g, kLowJump).playable());
}

TEST_CASE("downward-only segments are not playable") {
  // Staircase descending to the right in 2-tile steps.
  AffordanceGrid g(15, 16, Affordance::kPassable);
  for (int c = 0; c < 16; ++c) {
    for (int r = 2 + std::min(c / 2, 6) * 2; r < 15; ++r) g.at(r, c) = Affordance::kSolid;
  }
  // mirror so progress would require climbing 2-tile steps with a rise-1 hop
  AffordanceGrid m(15, 16);
  for (int r = 0; r < 15; ++r) {
    for (int c = 0; c < 16; ++c) m.at(r, c) = g.at(r, 15 - c);
  }
  const std::vector<JumpArc> hop = {derive_arc({1.0, 1.0, 1.0, 0, 1.0})};
  CHECK(astar(g, hop, TraversalDir::kLeftToRight).playable);
  CHECK_FALSE(evaluate_playability(m, hop).playable());
}

TEST_CASE("jumps that touch hazards are discarded") {
  AffordanceGrid g = flat_floor();
  g.at(11, 1) = Affordance::kHazard;
  const auto moves = successors(g, {13, 0}, kLowJump);
  for (const Move& m : moves) CHECK(g.at(m.to.row, m.to.col) != Affordance::kHazard);
}

TEST_CASE("head bumps end the jump below the ceiling") {
  AffordanceGrid g = flat_floor();
  for (int c = 0; c < 16; ++c) g.at(11, c) = Affordance::kSolid;  // ceiling two above the floor
  for (const Move& m : successors(g, {13, 3}, kHighJump)) CHECK(m.to.row >= 12);
}

TEST_CASE("astar agrees with the BFS oracle and paths are legal") {
  Rng rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const AffordanceGrid g = oracle::random_grid(rng, 0.3, 0.05, 0.08, trial % 2 == 0);
    for (TraversalDir d : {TraversalDir::kLeftToRight, TraversalDir::kBottomToTop}) {
      const PathResult r = astar(g, kLowJump, d);
      CHECK(r.playable == oracle::bfs_reachable(g, kLowJump, d));
      if (r.playable) CHECK(legal_path(g, r, kLowJump));
    }
  }
}

TEST_CASE("more arcs never make a segment unplayable") {
  Rng rng(77);
  std::vector<JumpArc> both = kLowJump;
  both.push_back(kHighJump[0]);
  for (int trial = 0; trial < 60; ++trial) {
    const AffordanceGrid g = oracle::random_grid(rng, 0.25, 0.04, 0.05, true);
    if (evaluate_playability(g, kLowJump).playable()) CHECK(evaluate_playability(g, both).playable());
  }
}

TEST_CASE("path dump") {
  const PathResult r = astar(flat_floor(), kLowJump, TraversalDir::kLeftToRight);
  const auto j = r.to_json();
  CHECK(j["playable"] == true);
  CHECK(j["direction"] == "left-to-right");
  CHECK(j["path"].size() == r.path.size());
  CHECK(j["path"][0]["action"] == "start");
}
