#ifndef NL2PLAN_SERVICE_HTTP_SERVICE_H
#define NL2PLAN_SERVICE_HTTP_SERVICE_H

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "nl2plan/service/run_manager.h"

namespace nl2plan::service {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// JSON API over a RunManager. handle() is the whole routing table; the
// server only adapts sockets to it.
//
//   POST /runs                          202 manifest
//   GET  /runs                          manifests
//   GET  /runs/{id}                     manifest
//   GET  /runs/{id}/steps/{n}           step record
//   GET  /runs/{id}/steps/{n}/history   superseded step records
//   POST /runs/{id}/steps/{n}/feedback  manifest
//   POST /runs/{id}/resume              manifest
//   GET  /runs/{id}/plan                plan or "No plan found"
//   GET  /runs/{id}/usage               usage.json
//   GET  /api/errors                    error code table
class HttpService {
 public:
  // Static files below `ui_dir` are served at "/" when it is given.
  HttpService(RunManager& runs, std::optional<std::filesystem::path> ui_dir = {});
  ~HttpService();

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::string& body) const;

  // Binds to the port (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Server;
  RunManager& runs_;
  std::optional<std::filesystem::path> ui_dir_;
  std::unique_ptr<Server> server_;
};

}  // namespace nl2plan::service

#endif
