#include <algorithm>
#include <fstream>
#include <sstream>

#include "gameblend/corpus.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

TileGrid TileGrid::window(int row0, int col0, int height, int width) const {
  TileGrid out(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.at(r, c) = at(row0 + r, col0 + c);
  }
  return out;
}

void TileGrid::paste(const TileGrid& src, int row0, int col0) {
  for (int r = 0; r < src.rows; ++r) {
    for (int c = 0; c < src.cols; ++c) at(row0 + r, col0 + c) = src.at(r, c);
  }
}

std::string dir_to_string(const DirLabel& d) {
  std::string s(4, '0');
  for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)] ? '1' : '0';
  return s;
}

DirLabel dir_from_string(std::string_view bits) {
  std::string compact;
  for (char c : bits) {
    if (c == '0' || c == '1') compact.push_back(c);
    else if (c != ',' && c != ' ') throw DataError("bad directional label '" + std::string(bits) + "'");
  }
  if (compact.size() != 4) throw DataError("directional label needs 4 bits: '" + std::string(bits) + "'");
  DirLabel d{};
  for (std::size_t i = 0; i < 4; ++i) d[i] = compact[i] == '1';
  return d;
}

int dir_to_index(const DirLabel& d) {
  return (d[0] ? 8 : 0) | (d[1] ? 4 : 0) | (d[2] ? 2 : 0) | (d[3] ? 1 : 0);
}

DirLabel dir_from_index(int index) {
  return {static_cast<std::uint8_t>((index >> 3) & 1), static_cast<std::uint8_t>((index >> 2) & 1),
          static_cast<std::uint8_t>((index >> 1) & 1), static_cast<std::uint8_t>(index & 1)};
}

std::vector<double> Segment::game_label(int k) const {
  std::vector<double> label(static_cast<std::size_t>(k), 0.0);
  if (game && *game >= 0 && *game < k) label[static_cast<std::size_t>(*game)] = 1.0;
  return label;
}

std::vector<Segment> Corpus::game_segments(GameId g) const {
  std::vector<Segment> out;
  for (const auto& s : segments) {
    if (s.game == g) out.push_back(s);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

template <typename Lookup>
TileGrid parse_with(std::string_view text, Lookup lookup) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].empty()) throw BadShape("empty level text");
  const int cols = static_cast<int>(lines[0].size());
  TileGrid grid(static_cast<int>(lines.size()), cols);
  for (int r = 0; r < grid.rows; ++r) {
    const auto& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != cols) throw RaggedRows(r);
    for (int c = 0; c < cols; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      auto id = lookup(ch);
      if (!id) throw UnknownTile(ch, r, c);
      grid.at(r, c) = *id;
    }
  }
  return grid;
}

template <typename Symbol>
std::string render_with(const TileGrid& grid, Symbol symbol) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.rows) * (grid.cols + 1));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) out.push_back(symbol(grid.at(r, c)));
    out.push_back('\n');
  }
  return out;
}

bool enterable(Affordance a) { return a == Affordance::kPassable || a == Affordance::kClimbable; }

}  // namespace

TileGrid parse_level(std::string_view text, const TileVocab& vocab, GameId game) {
  return parse_with(text, [&](char ch) { return vocab.lookup(game, ch); });
}

std::string render_level(const TileGrid& grid, const TileVocab& vocab) {
  return render_with(grid, [&](TileId id) { return vocab.tile(id).symbol; });
}

std::string render_glyphs(const TileGrid& grid, const TileVocab& vocab) {
  return render_with(grid, [&](TileId id) { return vocab.tile(id).glyph; });
}

TileGrid parse_glyphs(std::string_view text, const TileVocab& vocab) {
  return parse_with(text, [&](char ch) { return vocab.from_glyph(ch); });
}

PadPolicy pad_policy_from_string(std::string_view s) {
  if (s == "top-background-row") return PadPolicy::kTopBackgroundRow;
  if (s == "duplicate-outermost-rows") return PadPolicy::kDuplicateOutermostRows;
  throw DataError("unknown pad policy '" + std::string(s) + "'");
}

TileGrid pad_grid(const TileGrid& grid, PadPolicy policy, int target_rows, const TileVocab& vocab,
                  GameId game) {
  if (grid.rows > target_rows) throw GridTooTall(grid.rows, target_rows);
  if (grid.rows == target_rows) return grid;

  if (policy == PadPolicy::kTopBackgroundRow) {
    const int extra = target_rows - grid.rows;
    TileGrid out(target_rows, grid.cols, vocab.game(game).background);
    out.paste(grid, extra, 0);
    return out;
  }

  if (grid.rows == 0) throw BadShape("cannot duplicate rows of an empty grid");
  std::vector<std::vector<TileId>> rows;
  for (int r = 0; r < grid.rows; ++r) {
    rows.emplace_back(grid.cells.begin() + static_cast<std::ptrdiff_t>(r) * grid.cols,
                      grid.cells.begin() + static_cast<std::ptrdiff_t>(r + 1) * grid.cols);
  }
  bool top = true;
  while (static_cast<int>(rows.size()) < target_rows) {
    if (top) rows.insert(rows.begin(), rows.front());
    else rows.push_back(rows.back());
    top = !top;
  }
  TileGrid out(target_rows, grid.cols);
  for (int r = 0; r < target_rows; ++r) {
    std::copy(rows[static_cast<std::size_t>(r)].begin(), rows[static_cast<std::size_t>(r)].end(),
              out.cells.begin() + static_cast<std::ptrdiff_t>(r) * grid.cols);
  }
  return out;
}

std::vector<TileGrid> extract_segments(const TileGrid& grid) {
  std::vector<TileGrid> out;
  if (grid.rows == kSegmentRows) {
    for (int c = 0; c + kSegmentCols <= grid.cols; c += kSegmentCols) {
      out.push_back(grid.window(0, c, kSegmentRows, kSegmentCols));
    }
    return out;
  }
  if (grid.cols == kSegmentCols) {
    for (int r = grid.rows - kSegmentRows; r >= 0; r -= kSegmentRows) {
      out.push_back(grid.window(r, 0, kSegmentRows, kSegmentCols));
    }
    return out;
  }
  throw BadShape("level is " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                 "; expected 15 rows or 16 columns");
}

std::vector<TileGrid> extract_tiled_segments(const TileGrid& grid) {
  if (grid.rows % kSegmentRows != 0 || grid.cols % kSegmentCols != 0) {
    throw BadShape("tiled map is " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                   "; sides must be multiples of 15x16");
  }
  std::vector<TileGrid> out;
  for (int r = 0; r < grid.rows; r += kSegmentRows) {
    for (int c = 0; c < grid.cols; c += kSegmentCols) {
      out.push_back(grid.window(r, c, kSegmentRows, kSegmentCols));
    }
  }
  return out;
}

bool is_all_solid(const TileGrid& grid, const TileVocab& vocab) {
  return std::all_of(grid.cells.begin(), grid.cells.end(),
                     [&](TileId id) { return vocab.affordance(id) == Affordance::kSolid; });
}

std::vector<Segment> filter_solid(std::vector<Segment> segments, const TileVocab& vocab) {
  std::erase_if(segments, [&](const Segment& s) { return is_all_solid(s.grid, vocab); });
  return segments;
}

Corpus upsample(const std::map<GameId, std::vector<Segment>>& per_game, const TileVocab& vocab) {
  Corpus corpus;
  corpus.vocab = vocab;
  std::size_t max_count = 0;
  for (const auto& [game, segments] : per_game) {
    if (segments.empty()) {
      throw EmptyGame(game >= 0 && game < vocab.game_count() ? vocab.game(game).name
                                                              : std::to_string(game));
    }
    max_count = std::max(max_count, segments.size());
  }
  for (const auto& [game, segments] : per_game) {
    corpus.counts_before[game] = static_cast<int>(segments.size());
    for (std::size_t i = 0; i < max_count; ++i) {
      Segment s = segments[i % segments.size()];
      s.game = game;
      corpus.segments.push_back(std::move(s));
    }
    corpus.counts_after[game] = static_cast<int>(max_count);
  }
  return corpus;
}

void encode_onehot(const TileGrid& grid, std::size_t vocab_size, std::span<double> out) {
  const std::size_t cells = grid.cells.size();
  if (out.size() != cells * vocab_size) throw DimMismatch("one-hot buffer has the wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (grid.cells[i] >= vocab_size) throw DimMismatch("tile id outside vocabulary");
    out[i * vocab_size + grid.cells[i]] = 1.0;
  }
}

std::vector<double> encode_onehot(const TileGrid& grid, std::size_t vocab_size) {
  std::vector<double> out(grid.cells.size() * vocab_size);
  encode_onehot(grid, vocab_size, out);
  return out;
}

TileGrid decode_argmax(std::span<const double> scores, std::size_t vocab_size, int rows, int cols) {
  const auto cells = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (scores.size() != cells * vocab_size) throw DimMismatch("score vector has the wrong size");
  TileGrid grid(rows, cols);
  for (std::size_t i = 0; i < cells; ++i) {
    const auto block = scores.subspan(i * vocab_size, vocab_size);
    // First maximum wins ties.
    grid.cells[i] = static_cast<TileId>(std::max_element(block.begin(), block.end()) - block.begin());
  }
  return grid;
}

std::map<int, DirLabel> parse_annotations(std::string_view text) {
  std::map<int, DirLabel> labels;
  int line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("annotation line " + std::to_string(line_no) + " lacks a tab");
    }
    int index = 0;
    try {
      index = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw DataError("annotation line " + std::to_string(line_no) + " has a bad index");
    }
    labels[index] = dir_from_string(line.substr(tab + 1));
  }
  return labels;
}

std::string render_annotations(const std::map<int, DirLabel>& labels) {
  std::string out;
  for (const auto& [index, label] : labels) {
    out += std::to_string(index) + "\t" + dir_to_string(label) + "\n";
  }
  return out;
}

DirLabel auto_label(const TileGrid& grid, const TileVocab& vocab) {
  auto side_open = [&](auto cell_at, int length) {
    int run = 0;
    for (int i = 0; i < length; ++i) {
      const TileId id = cell_at(i);
      if (vocab.tile(id).door) return true;
      run = enterable(vocab.affordance(id)) ? run + 1 : 0;
      if (run >= 2) return true;
    }
    return false;
  };
  DirLabel d{};
  d[kUp] = side_open([&](int i) { return grid.at(0, i); }, grid.cols);
  d[kDown] = side_open([&](int i) { return grid.at(grid.rows - 1, i); }, grid.cols);
  d[kLeft] = side_open([&](int i) { return grid.at(i, 0); }, grid.rows);
  d[kRight] = side_open([&](int i) { return grid.at(i, grid.cols - 1); }, grid.rows);
  return d;
}

}  // namespace gameblend
