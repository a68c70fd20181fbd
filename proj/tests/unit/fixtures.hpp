#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coldstart/catalog.hpp"

namespace fixtures {

// u1 buys {A,B}; u2 buys {A,B,C}; u3 buys {B,C}; u4 buys {D}.
inline std::vector<coldstart::catalog::Transaction> t1() {
  return {{"u1", "A", 10, 100}, {"u1", "B", 10, 101}, {"u2", "A", 10, 102}, {"u2", "B", 10, 103},
          {"u2", "C", 10, 200}, {"u3", "B", 10, 104}, {"u3", "C", 10, 201}, {"u4", "D", 10, 202}};
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("coldstart-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace fixtures
