#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "naive/dsl.hpp"
#include "naive/error.hpp"

namespace naive::testing {

inline std::filesystem::path source_dir() { return NAIVE_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::vector<std::filesystem::path> fixtures(const std::string& subdir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(source_dir() / "tests/fixtures" / subdir))
    if (e.path().extension() == ".nkb") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// Parses a shipped file and throws when it carries parse diagnostics.
inline KnowledgeBase load_kb(const std::filesystem::path& p) {
  auto r = parse_kb(read_file(p), p.filename().string());
  if (!r.ok()) throw Error("fixture does not parse: " + format_diagnostic(r.diagnostics.front()));
  return std::move(r.kb);
}

inline KnowledgeBase shipped_kb(const std::string& name) {
  return load_kb(source_dir() / "kb" / name);
}

}  // namespace naive::testing
