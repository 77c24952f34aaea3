#include <set>

#include "doctest.h"
#include "gameblend/corpus.hpp"
#include "gameblend/errors.hpp"
#include "helpers.hpp"

using namespace gameblend;

namespace {

TileVocab two_games() {
  return TileVocab::from_json(nlohmann::json::parse(R"({
    "games": [
      {"name": "a", "background": "-",
       "tiles": {"-": "passable", "X": "solid", "^": "hazard", "D": {"affordance": "passable", "door": true}}},
      {"name": "b", "background": "-",
       "tiles": [{"char": "-", "affordance": "passable"}, {"char": "X", "affordance": "solid"},
                 {"char": "L", "affordance": "climbable"}]}
    ]})"));
}

TileGrid grid_of(int rows, int cols, TileId base = 0) {
  TileGrid g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) g.at(r, c) = static_cast<TileId>(base + r);
  }
  return g;
}

}  // namespace

TEST_CASE("vocab namespaces symbols per game") {
  const TileVocab v = two_games();
  CHECK(v.game_count() == 2);
  CHECK(v.size() == 7);
  REQUIRE(v.lookup(0, 'X'));
  REQUIRE(v.lookup(1, 'X'));
  CHECK(*v.lookup(0, 'X') != *v.lookup(1, 'X'));
  CHECK_FALSE(v.lookup(0, 'L'));
  CHECK(v.affordance(*v.lookup(1, 'L')) == Affordance::kClimbable);
  CHECK(v.tile(*v.lookup(0, 'D')).door);

  std::set<char> glyphs;
  for (std::size_t i = 0; i < v.size(); ++i) glyphs.insert(v.tile(static_cast<TileId>(i)).glyph);
  CHECK(glyphs.size() == v.size());

  CHECK(TileVocab::from_json(v.to_json()) == v);
}

TEST_CASE("parse and render round trip") {
  const TileVocab v = two_games();
  const std::string text = testing::flat_level(2);
  const TileGrid g = parse_level(text, v, 0);
  CHECK(g.rows == 15);
  CHECK(g.cols == 16);
  CHECK(render_level(g, v) == text);
  CHECK(parse_glyphs(render_glyphs(g, v), v) == g);
}

TEST_CASE("parse errors carry positions") {
  const TileVocab v = two_games();
  try {
    parse_level("--\n-Q\n", v, 0);
    FAIL("expected UnknownTile");
  } catch (const UnknownTile& e) {
    CHECK(e.symbol == 'Q');
    CHECK(e.line == 1);
    CHECK(e.col == 1);
  }
  CHECK_THROWS_AS(parse_level("---\n--\n", v, 0), RaggedRows);
  CHECK(parse_level("--\r\n--\r\n\n", v, 0).rows == 2);
}

TEST_CASE("horizontal levels split left to right, dropping the tail") {
  const TileGrid g = grid_of(15, 40);
  auto segs = extract_segments(g);
  REQUIRE(segs.size() == 2);
  TileGrid level(15, 40);
  for (int c = 0; c < 40; ++c) level.at(0, c) = static_cast<TileId>(c);
  segs = extract_segments(level);
  CHECK(segs[0].at(0, 0) == 0);
  CHECK(segs[1].at(0, 0) == 16);
}

TEST_CASE("vertical levels split bottom to top") {
  TileGrid level(32, 16);
  for (int r = 0; r < 32; ++r) level.at(r, 0) = static_cast<TileId>(r);
  const auto segs = extract_segments(level);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].at(0, 0) == 17);  // bottom window covers rows 17..31
  CHECK(segs[1].at(0, 0) == 2);
  CHECK_THROWS_AS(extract_segments(TileGrid(20, 20)), BadShape);
}

TEST_CASE("tiled maps yield every aligned room") {
  TileGrid map(30, 48);
  for (int r = 0; r < 30; ++r) {
    for (int c = 0; c < 48; ++c) map.at(r, c) = static_cast<TileId>((r / 15) * 3 + c / 16);
  }
  const auto rooms = extract_tiled_segments(map);
  REQUIRE(rooms.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(rooms[static_cast<std::size_t>(i)].at(7, 7) == i);
  CHECK_THROWS_AS(extract_tiled_segments(TileGrid(31, 48)), BadShape);
}

TEST_CASE("padding policies") {
  const TileVocab v = two_games();
  const TileGrid g = grid_of(11, 16, 1);  // row r holds tile 1 + r
  const TileGrid top = pad_grid(g, PadPolicy::kTopBackgroundRow, 15, v, 0);
  CHECK(top.rows == 15);
  CHECK(top.at(0, 0) == v.game(0).background);
  CHECK(top.at(4, 0) == 1);

  const TileGrid dup = pad_grid(g, PadPolicy::kDuplicateOutermostRows, 15, v, 0);
  REQUIRE(dup.rows == 15);
  // two copies of the first row on top, two of the last below
  CHECK(dup.at(0, 0) == 1);
  CHECK(dup.at(1, 0) == 1);
  CHECK(dup.at(2, 0) == 1);
  CHECK(dup.at(13, 0) == 11);
  CHECK(dup.at(14, 0) == 11);
  CHECK_THROWS_AS(pad_grid(grid_of(16, 16), PadPolicy::kTopBackgroundRow, 15, v, 0), GridTooTall);
}

TEST_CASE("upsampling repeats each game cyclically to the largest count") {
  const TileVocab v = two_games();
  std::map<GameId, std::vector<Segment>> per_game;
  for (int i = 0; i < 5; ++i) per_game[0].push_back({grid_of(15, 16, static_cast<TileId>(i)), 0, {}});
  for (int i = 0; i < 2; ++i) per_game[1].push_back({grid_of(15, 16, static_cast<TileId>(i)), 1, {}});
  const Corpus c = upsample(per_game, v);
  CHECK(c.segments.size() == 10);
  CHECK(c.counts_before.at(1) == 2);
  CHECK(c.counts_after.at(1) == 5);
  const auto b = c.game_segments(1);
  CHECK(b[2].grid == b[0].grid);
  CHECK(b[3].grid == b[1].grid);

  per_game[1].clear();
  CHECK_THROWS_AS(upsample(per_game, v), EmptyGame);
}

TEST_CASE("solid segments are filtered") {
  const TileVocab v = two_games();
  const TileId x = *v.lookup(0, 'X');
  std::vector<Segment> s = {{TileGrid(15, 16, x), 0, {}}, {TileGrid(15, 16, 0), 0, {}}};
  CHECK(is_all_solid(s[0].grid, v));
  CHECK(filter_solid(s, v).size() == 1);
}

TEST_CASE("one-hot encoding inverts through argmax") {
  TileGrid g(15, 16);
  for (std::size_t i = 0; i < g.cells.size(); ++i) g.cells[i] = static_cast<TileId>(i % 7);
  const auto x = encode_onehot(g, 7);
  CHECK(x.size() == 240 * 7);
  double total = 0.0;
  for (double v : x) total += v;
  CHECK(total == 240.0);
  CHECK(decode_argmax(x, 7) == g);
  CHECK_THROWS_AS(encode_onehot(g, 5), DimMismatch);

  std::vector<double> tie(240 * 3, 0.0);
  CHECK(decode_argmax(tie, 3).cells[0] == 0);
}

TEST_CASE("directional labels") {
  CHECK(dir_to_string(dir_from_string("1010")) == "1010");
  CHECK(dir_to_index(dir_from_string("1000")) == 8);
  for (int i = 0; i < 16; ++i) CHECK(dir_to_index(dir_from_index(i)) == i);

  const auto labels = parse_annotations("# comment\n0\t1100\n3\t0001\n");
  CHECK(labels.size() == 2);
  CHECK(dir_to_string(labels.at(3)) == "0001");
  CHECK(parse_annotations(render_annotations(labels)) == labels);
  CHECK_THROWS_AS(parse_annotations("0 1100\n"), DataError);
}

TEST_CASE("auto labels follow openings and doors") {
  const TileVocab v = two_games();
  const TileId x = *v.lookup(0, 'X');
  const TileId d = *v.lookup(0, 'D');
  TileGrid g(15, 16, 0);
  for (int c = 0; c < 16; ++c) g.at(0, c) = g.at(14, c) = x;
  for (int r = 0; r < 15; ++r) g.at(r, 0) = g.at(r, 15) = x;
  CHECK(dir_to_string(auto_label(g, v)) == "0000");
  g.at(0, 7) = g.at(0, 8) = 0;
  g.at(5, 15) = d;
  CHECK(dir_to_string(auto_label(g, v)) == "1001");
}

TEST_CASE("synthetic corpus is deterministic and labeled") {
  SyntheticOptions o;
  o.games = 4;
  o.per_game = 10;
  o.directional = true;
  const Corpus a = make_synthetic_corpus(o);
  const Corpus b = make_synthetic_corpus(o);
  CHECK(a.segments == b.segments);
  CHECK(a.segments.size() == 40);
  for (const Segment& s : a.segments) {
    REQUIRE(s.dir);
    CHECK(dir_to_index(*s.dir) != 0);
    CHECK(auto_label(s.grid, a.vocab) == *s.dir);
  }
}

TEST_CASE("loading levels from files") {
  const auto dir = testing::temp_dir("corpus_load");
  const TileVocab v = two_games();
  testing::write_file(dir / "l1.txt", testing::flat_level(1, 40));
  std::string short_level;
  for (int r = 0; r < 11; ++r) short_level += std::string(16, r == 10 ? 'X' : '-') + "\n";
  testing::write_file(dir / "short.txt", short_level);
  testing::write_file(dir / "ann.txt", "1\t0011\n");

  GameSource a{"a", {dir / "l1.txt"}, std::nullopt, false, false, dir / "ann.txt"};
  GameSource b{"b", {dir / "short.txt"}, PadPolicy::kDuplicateOutermostRows, false, false, {}};
  // b's level uses symbols shared with a; load with b's namespace
  const Corpus c = build_corpus({a, b}, v);
  CHECK(c.counts_before.at(0) == 2);
  CHECK(c.counts_before.at(1) == 1);
  CHECK(c.segments.size() == 4);
  CHECK(c.segments[1].dir);
  CHECK_FALSE(c.segments[0].dir);

  GameSource bad{"a", {dir / "l1.txt"}, std::nullopt, false, false, {}};
  testing::write_file(dir / "ann_bad.txt", "9\t0011\n");
  bad.annotations = dir / "ann_bad.txt";
  CHECK_THROWS_AS(load_game_segments(bad, v), DataError);
}
