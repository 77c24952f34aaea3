#include <algorithm>

#include "gameblend/corpus.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

namespace {

struct Palette {
  TileId background, wall, block, hazard, ladder;
};

Palette palette_of(const TileVocab& vocab, GameId g) {
  return {*vocab.lookup(g, '-'), *vocab.lookup(g, 'X'), *vocab.lookup(g, 'B'),
          *vocab.lookup(g, '^'), *vocab.lookup(g, 'H')};
}

int uniform(Rng& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void fill_row(TileGrid& g, int r, int c0, int c1, TileId t) {
  for (int c = std::max(c0, 0); c <= std::min(c1, g.cols - 1); ++c) g.at(r, c) = t;
}

// Floor with gaps and floating platforms.
TileGrid style_ground(const Palette& p, Rng& rng) {
  TileGrid g(kSegmentRows, kSegmentCols, p.background);
  fill_row(g, 13, 0, 15, p.wall);
  fill_row(g, 14, 0, 15, p.wall);
  const int gaps = uniform(rng, 0, 1);
  for (int i = 0; i < gaps; ++i) {
    const int c = uniform(rng, 3, 11);
    for (int r = 13; r <= 14; ++r) fill_row(g, r, c, c + 1, p.background);
  }
  const int platforms = uniform(rng, 1, 3);
  for (int i = 0; i < platforms; ++i) {
    const int r = uniform(rng, 7, 10);
    const int c = uniform(rng, 0, 12);
    fill_row(g, r, c, c + uniform(rng, 2, 4), p.block);
  }
  if (uniform(rng, 0, 2) == 0) g.at(12, uniform(rng, 2, 13)) = p.hazard;
  return g;
}

// Pillars rising from a floor.
TileGrid style_pillars(const Palette& p, Rng& rng) {
  TileGrid g(kSegmentRows, kSegmentCols, p.background);
  fill_row(g, 14, 0, 15, p.wall);
  const int pillars = uniform(rng, 2, 4);
  for (int i = 0; i < pillars; ++i) {
    const int c = uniform(rng, 1, 14);
    const int h = uniform(rng, 3, 8);
    for (int r = 14 - h; r < 14; ++r) g.at(r, c) = p.wall;
    g.at(13 - h, c) = p.block;
  }
  return g;
}

// Horizontal bars joined by ladders.
TileGrid style_ladders(const Palette& p, Rng& rng) {
  TileGrid g(kSegmentRows, kSegmentCols, p.background);
  for (int r : {4, 9, 14}) fill_row(g, r, 0, 15, p.block);
  for (int band = 0; band < 2; ++band) {
    const int c = uniform(rng, 1, 14);
    const int top = band == 0 ? 4 : 9;
    for (int r = top; r < top + 5; ++r) g.at(r, c) = p.ladder;
  }
  if (uniform(rng, 0, 1) == 0) g.at(13, uniform(rng, 0, 15)) = p.hazard;
  return g;
}

// Scattered blocks and hazards.
TileGrid style_cave(const Palette& p, Rng& rng) {
  TileGrid g(kSegmentRows, kSegmentCols, p.background);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& cell : g.cells) {
    const double x = u(rng);
    if (x < 0.22) cell = p.wall;
    else if (x < 0.26) cell = p.hazard;
  }
  return g;
}

void cut_border(TileGrid& g, const Palette& p, const DirLabel& d) {
  fill_row(g, 0, 0, 15, p.wall);
  fill_row(g, 14, 0, 15, p.wall);
  for (int r = 0; r < kSegmentRows; ++r) {
    g.at(r, 0) = p.wall;
    g.at(r, 15) = p.wall;
  }
  if (d[kUp]) fill_row(g, 0, 7, 8, p.background);
  if (d[kDown]) fill_row(g, 14, 7, 8, p.background);
  if (d[kLeft]) g.at(6, 0) = g.at(7, 0) = p.background;
  if (d[kRight]) g.at(6, 15) = g.at(7, 15) = p.background;
}

}  // namespace

TileVocab make_synthetic_vocab(int games) {
  TileVocab vocab;
  for (int g = 0; g < games; ++g) {
    std::vector<TileInfo> tiles = {
        {'-', 0, "empty", Affordance::kPassable, false, "", '\0'},
        {'X', 0, "wall", Affordance::kSolid, false, "", '\0'},
        {'B', 0, "block", Affordance::kSolid, false, "", '\0'},
        {'^', 0, "hazard", Affordance::kHazard, false, "", '\0'},
        {'H', 0, "ladder", Affordance::kClimbable, false, "", '\0'},
    };
    vocab.add_game("synth" + std::to_string(g), '-', tiles);
  }
  return vocab;
}

Corpus make_synthetic_corpus(const SyntheticOptions& options) {
  if (options.games < 1 || options.per_game < 1) throw DataError("synthetic corpus needs games");
  const TileVocab vocab = make_synthetic_vocab(options.games);
  std::map<GameId, std::vector<Segment>> per_game;
  for (GameId g = 0; g < options.games; ++g) {
    Rng rng = derive_rng(options.seed, static_cast<std::uint64_t>(g));
    const Palette p = palette_of(vocab, g);
    for (int i = 0; i < options.per_game; ++i) {
      TileGrid grid;
      switch (g % 4) {
        case 0: grid = style_ground(p, rng); break;
        case 1: grid = style_pillars(p, rng); break;
        case 2: grid = style_ladders(p, rng); break;
        default: grid = style_cave(p, rng); break;
      }
      Segment s{std::move(grid), g, std::nullopt};
      if (options.directional) {
        const DirLabel d = dir_from_index(uniform(rng, 1, 15));
        cut_border(s.grid, p, d);
        s.dir = d;
      }
      per_game[g].push_back(std::move(s));
    }
  }
  return upsample(per_game, vocab);
}

}  // namespace gameblend
