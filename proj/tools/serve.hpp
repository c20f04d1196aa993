#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "hetscreen/error.hpp"
#include "hetscreen/report.hpp"

// Included after Eigen: resolv.h defines a _res macro.
#include <httplib.h>

namespace hetscreen::serve {

inline constexpr const char* placeholder_page = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>hetscreen report</title></head>
<body>
<h1>hetscreen report</h1>
<p>The report document is available at <a href="/report">/report</a>.</p>
</body>
</html>
)";

/// Read-only service for one report document and an optional static UI
/// bundle. The report is loaded once; later edits to the file are not seen.
class ReportServer {
 public:
  ReportServer(const std::string& report_path, std::string assets_dir = {}) : assets_(std::move(assets_dir)) {
    body_ = load(report_path);
    parse_report(body_);
    server_ = std::make_unique<httplib::Server>();
    // SO_REUSEADDR only: the library default of SO_REUSEPORT would let a
    // second server share a busy port silently.
    server_->set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server_->Get("/report", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(body_, "application/json");
    });
    if (!assets_.empty()) {
      if (!std::filesystem::is_directory(assets_)) throw ConfigError("assets directory '" + assets_ + "' not found");
      server_->set_mount_point("/", assets_);
    } else {
      server_->Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(placeholder_page, "text/html");
      });
    }
    // Anything that is not a GET is refused.
    auto refuse = [](const httplib::Request&, httplib::Response& res) {
      res.status = 405;
      res.set_content("read-only\n", "text/plain");
    };
    server_->Post(".*", refuse);
    server_->Put(".*", refuse);
    server_->Delete(".*", refuse);
    server_->Patch(".*", refuse);
  }

  /// Binds to 127.0.0.1:port (0 picks a free port) and returns the port.
  int bind(int port) {
    const int bound = port == 0 ? server_->bind_to_any_port("127.0.0.1") : (server_->bind_to_port("127.0.0.1", port) ? port : -1);
    if (bound < 0) throw ConfigError("port " + std::to_string(port) + " is busy or unavailable");
    return bound;
  }
  void listen() { server_->listen_after_bind(); }
  void stop() { server_->stop(); }
  bool running() const { return server_->is_running(); }
  const std::string& body() const noexcept { return body_; }

 private:
  static std::string load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open report '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string assets_;
  std::string body_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace hetscreen::serve
