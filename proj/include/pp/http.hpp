#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "pp/io.hpp"

namespace pp::http {

struct ServerOptions {
  std::filesystem::path runs_root = "runs";
  /// Relative input paths in POST /api/runs bodies resolve against this.
  std::filesystem::path base_dir = ".";
  /// Optional console bundle mounted at "/".
  std::optional<std::filesystem::path> static_dir;
};

/// Maps a module error code to its HTTP status.
int status_for(std::string_view error_code);

class Server {
 public:
  explicit Server(ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pp::http
