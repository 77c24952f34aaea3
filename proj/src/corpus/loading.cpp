#include "gameblend/corpus.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

std::vector<Segment> load_game_segments(const GameSource& source, const TileVocab& vocab) {
  const auto game = vocab.find_game(source.game);
  if (!game) throw DataError("game '" + source.game + "' is not in the vocabulary");

  std::vector<Segment> segments;
  for (const auto& path : source.levels) {
    TileGrid grid = parse_level(read_text_file(path), vocab, *game);
    if (source.pad) {
      if (source.tiled) {
        throw BadShape("padding does not apply to tiled maps (" + path.string() + ")");
      }
      // Pad short horizontal levels; vertical levels are already 16 wide.
      if (grid.rows < kSegmentRows) grid = pad_grid(grid, *source.pad, kSegmentRows, vocab, *game);
    }
    const auto windows = source.tiled ? extract_tiled_segments(grid) : extract_segments(grid);
    for (const auto& w : windows) segments.push_back(Segment{w, *game, std::nullopt});
  }
  if (source.filter_solid) segments = filter_solid(std::move(segments), vocab);

  if (source.annotations) {
    const auto labels = parse_annotations(read_text_file(*source.annotations));
    for (const auto& [index, label] : labels) {
      if (index < 0 || index >= static_cast<int>(segments.size())) {
        throw DataError("annotation index " + std::to_string(index) + " out of range for " +
                        source.game);
      }
      segments[static_cast<std::size_t>(index)].dir = label;
    }
  }
  return segments;
}

Corpus build_corpus(const std::vector<GameSource>& sources, const TileVocab& vocab) {
  std::map<GameId, std::vector<Segment>> per_game;
  for (const auto& source : sources) {
    auto segments = load_game_segments(source, vocab);
    auto& bucket = per_game[*vocab.find_game(source.game)];
    bucket.insert(bucket.end(), segments.begin(), segments.end());
  }
  return upsample(per_game, vocab);
}

}  // namespace gameblend
