#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/random.hpp"

namespace gameblend {

inline constexpr int kSegmentRows = 15;
inline constexpr int kSegmentCols = 16;
inline constexpr int kSegmentCells = kSegmentRows * kSegmentCols;

using TileId = std::uint16_t;
using GameId = int;

enum class Affordance : std::uint8_t { kSolid, kHazard, kPassable, kClimbable };

std::string_view to_string(Affordance a);
Affordance affordance_from_string(std::string_view s);

struct TileInfo {
  char symbol = '?';  // character in the game's own level files
  GameId game = 0;
  std::string name;
  Affordance affordance = Affordance::kPassable;
  bool door = false;
  std::string color;  // display color, "#rrggbb"
  char glyph = '?';   // unique across all games; used for mixed-game text
  bool operator==(const TileInfo&) const = default;
};

struct GameInfo {
  std::string name;
  TileId background = 0;
  std::vector<TileId> tiles;
  bool operator==(const GameInfo&) const = default;
};

// Union vocabulary over several games. Tile ids are namespaced per game, so
// the same character in two games yields two distinct ids.
class TileVocab {
 public:
  TileVocab() = default;

  static TileVocab from_json(const nlohmann::json& j);
  static TileVocab load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Registers a game and its tiles; returns its GameId. `background` must be
  // one of the listed symbols.
  GameId add_game(std::string name, char background, const std::vector<TileInfo>& tiles);

  std::optional<TileId> lookup(GameId game, char symbol) const;
  std::optional<TileId> from_glyph(char glyph) const;
  std::optional<GameId> find_game(std::string_view name) const;

  const TileInfo& tile(TileId id) const { return tiles_.at(id); }
  const GameInfo& game(GameId g) const { return games_.at(static_cast<std::size_t>(g)); }
  Affordance affordance(TileId id) const { return tiles_[id].affordance; }

  std::size_t size() const { return tiles_.size(); }
  int game_count() const { return static_cast<int>(games_.size()); }

  // First solid tile of the game (or of any game when none), used as filler.
  TileId solid_tile(GameId preferred = 0) const;

  bool operator==(const TileVocab&) const = default;

 private:
  std::vector<TileInfo> tiles_;
  std::vector<GameInfo> games_;
};

struct TileGrid {
  int rows = 0;
  int cols = 0;
  std::vector<TileId> cells;  // row-major

  TileGrid() = default;
  TileGrid(int rows, int cols, TileId fill = 0)
      : rows(rows), cols(cols), cells(static_cast<std::size_t>(rows) * cols, fill) {}

  TileId at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  TileId& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }

  TileGrid window(int row0, int col0, int height, int width) const;
  void paste(const TileGrid& src, int row0, int col0);

  bool operator==(const TileGrid&) const = default;
};

enum Direction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

// Open sides in (up, down, left, right) order.
using DirLabel = std::array<std::uint8_t, 4>;

std::string dir_to_string(const DirLabel& d);  // "1010"
DirLabel dir_from_string(std::string_view bits);
int dir_to_index(const DirLabel& d);  // up is the most significant bit
DirLabel dir_from_index(int index);

struct Segment {
  TileGrid grid;
  std::optional<GameId> game;  // absent for generated segments
  std::optional<DirLabel> dir;

  std::vector<double> game_label(int k) const;
  bool operator==(const Segment&) const = default;
};

struct Corpus {
  std::vector<Segment> segments;
  TileVocab vocab;
  std::map<GameId, int> counts_before;
  std::map<GameId, int> counts_after;

  int game_count() const { return vocab.game_count(); }
  std::vector<Segment> game_segments(GameId g) const;
};

// Level text -------------------------------------------------------------

TileGrid parse_level(std::string_view text, const TileVocab& vocab, GameId game);
std::string render_level(const TileGrid& grid, const TileVocab& vocab);
// Mixed-game grids: one unique glyph per tile id.
std::string render_glyphs(const TileGrid& grid, const TileVocab& vocab);
TileGrid parse_glyphs(std::string_view text, const TileVocab& vocab);

std::vector<std::string> split_lines(std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// Segmentation -----------------------------------------------------------

enum class PadPolicy { kTopBackgroundRow, kDuplicateOutermostRows };
PadPolicy pad_policy_from_string(std::string_view s);

TileGrid pad_grid(const TileGrid& grid, PadPolicy policy, int target_rows,
                  const TileVocab& vocab, GameId game);

// Horizontal levels (15 rows) are scanned left to right, vertical levels
// (16 columns) bottom to top. Trailing partial windows are dropped.
std::vector<TileGrid> extract_segments(const TileGrid& grid);
// Room-grid maps whose sides are multiples of 15x16: every aligned window,
// row-major from the top left.
std::vector<TileGrid> extract_tiled_segments(const TileGrid& grid);

bool is_all_solid(const TileGrid& grid, const TileVocab& vocab);
std::vector<Segment> filter_solid(std::vector<Segment> segments, const TileVocab& vocab);

Corpus upsample(const std::map<GameId, std::vector<Segment>>& per_game, const TileVocab& vocab);

// Loading a multi-game corpus from level files ----------------------------

struct GameSource {
  std::string game;
  std::vector<std::filesystem::path> levels;
  std::optional<PadPolicy> pad;
  bool filter_solid = false;
  bool tiled = false;  // room-grid map, see extract_tiled_segments
  std::optional<std::filesystem::path> annotations;
};

// Segments of one game in file order, labeled with the game and, when an
// annotation file is given, its directional labels.
std::vector<Segment> load_game_segments(const GameSource& source, const TileVocab& vocab);
Corpus build_corpus(const std::vector<GameSource>& sources, const TileVocab& vocab);

// Encoding ---------------------------------------------------------------

std::vector<double> encode_onehot(const TileGrid& grid, std::size_t vocab_size);
void encode_onehot(const TileGrid& grid, std::size_t vocab_size, std::span<double> out);
// Per-cell argmax over `vocab_size` scores per cell.
TileGrid decode_argmax(std::span<const double> scores, std::size_t vocab_size,
                       int rows = kSegmentRows, int cols = kSegmentCols);

// Directional labels -----------------------------------------------------

// "index<TAB>UDLR" per line.
std::map<int, DirLabel> parse_annotations(std::string_view text);
std::string render_annotations(const std::map<int, DirLabel>& labels);

// Heuristic labeler for synthetic fixtures: an edge is open when its border
// row/column holds a run of >= 2 non-solid, non-hazard tiles or a door tile.
DirLabel auto_label(const TileGrid& grid, const TileVocab& vocab);

// Synthetic fixtures -----------------------------------------------------

struct SyntheticOptions {
  int games = 4;
  int per_game = 40;
  bool directional = false;
  std::uint64_t seed = 1;
};

// k games with disjoint palettes and distinct layout styles. Directional
// corpora draw a random non-zero label per segment, wall the border and cut
// 2-tile openings on the labeled sides.
Corpus make_synthetic_corpus(const SyntheticOptions& options);
TileVocab make_synthetic_vocab(int games);

}  // namespace gameblend
