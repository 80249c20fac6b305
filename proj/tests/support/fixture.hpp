#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "pp/io.hpp"
#include "pp/service.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(PP_SOURCE_DIR); }
inline fs::path fixture_dir() { return source_dir() / "fixtures"; }

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("pp-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline pp::json fixture_config_json() { return pp::read_json_file(fixture_dir() / "run.json"); }

inline pp::service::RunConfig fixture_config(const pp::json& overrides = pp::json::object()) {
  auto j = fixture_config_json();
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  return pp::service::run_config_from_json(j, fixture_dir());
}

/// Relative path -> file bytes for every regular file under `root`.
inline std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

}  // namespace testsupport
