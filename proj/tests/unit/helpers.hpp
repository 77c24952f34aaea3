#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "gameblend/corpus.hpp"

namespace testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gameblend_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// 15 lines of 16 chars; `floor` rows at the bottom are 'X', the rest '-'.
inline std::string flat_level(int floor_rows = 1, int width = 16) {
  std::string s;
  for (int r = 0; r < 15; ++r) {
    s += std::string(static_cast<std::size_t>(width), r >= 15 - floor_rows ? 'X' : '-');
    s += '\n';
  }
  return s;
}

}  // namespace testing
