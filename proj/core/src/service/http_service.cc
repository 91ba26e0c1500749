#include "nl2plan/service/http_service.h"

#include <regex>

#include <httplib.h>

namespace nl2plan::service {

using nlohmann::json;

struct HttpService::Server {
  httplib::Server http;
};

namespace {

const char* kIndexPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>nl2plan</title></head>
<body>
<h1>nl2plan</h1>
<p>The review UI bundle is not installed. Start the service with <code>--ui DIR</code>
to serve it. The JSON API is available under <code>/runs</code>.</p>
</body></html>
)";

ApiResponse json_response(int status, const json& body) {
  return {status, body.dump(2) + "\n", "application/json"};
}

ApiResponse error_response(const ApiError& e) { return json_response(e.status(), e.to_json()); }

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ApiError(400, "invalid-request", std::string("body is not JSON: ") + e.what());
  }
}

}  // namespace

HttpService::HttpService(RunManager& runs, std::optional<std::filesystem::path> ui_dir)
    : runs_(runs), ui_dir_(std::move(ui_dir)), server_(std::make_unique<Server>()) {}

HttpService::~HttpService() = default;

ApiResponse HttpService::handle(const std::string& method, const std::string& path,
                                const std::string& body) const {
  static const std::regex run_re(R"(^/runs/([^/]+)$)");
  static const std::regex step_re(R"(^/runs/([^/]+)/steps/([^/]+)$)");
  static const std::regex history_re(R"(^/runs/([^/]+)/steps/([^/]+)/history$)");
  static const std::regex feedback_re(R"(^/runs/([^/]+)/steps/([^/]+)/feedback$)");
  static const std::regex action_re(R"(^/runs/([^/]+)/(resume|plan|usage)$)");
  std::smatch mt;
  auto only = [&](const char* allowed) {
    if (method != allowed) {
      throw ApiError(405, "method-not-allowed", method + " is not allowed on " + path);
    }
  };
  try {
    if (path == "/" && !ui_dir_) {
      only("GET");
      return {200, kIndexPage, "text/html"};
    }
    if (path == "/api/errors") {
      only("GET");
      return json_response(200, api_error_codes());
    }
    if (path == "/runs" || path == "/runs/") {
      if (method == "POST") return json_response(202, runs_.create(parse_body(body)));
      only("GET");
      return json_response(200, runs_.list());
    }
    if (std::regex_match(path, mt, run_re)) {
      only("GET");
      return json_response(200, runs_.manifest(mt[1].str()));
    }
    if (std::regex_match(path, mt, step_re)) {
      only("GET");
      return json_response(200, runs_.step(mt[1].str(), mt[2].str()));
    }
    if (std::regex_match(path, mt, history_re)) {
      only("GET");
      return json_response(200, runs_.step_history(mt[1].str(), mt[2].str()));
    }
    if (std::regex_match(path, mt, feedback_re)) {
      only("POST");
      return json_response(200, runs_.feedback(mt[1].str(), mt[2].str(), parse_body(body)));
    }
    if (std::regex_match(path, mt, action_re)) {
      const std::string what = mt[2].str();
      if (what == "resume") {
        only("POST");
        return json_response(200, runs_.resume(mt[1].str(), parse_body(body)));
      }
      only("GET");
      return json_response(200, what == "plan" ? runs_.plan(mt[1].str()) : runs_.usage(mt[1].str()));
    }
    throw ApiError(404, "not-found", "no route for " + path);
  } catch (const ApiError& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(ApiError(500, "internal", e.what()));
  }
}

int HttpService::bind(const std::string& host, int port) {
  auto& http = server_->http;
  auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  if (ui_dir_) http.set_mount_point("/", ui_dir_->string());
  for (const char* pattern : {"/", "/api/errors", "/runs", "/runs/.*"}) {
    http.Get(pattern, adapt);
    http.Post(pattern, adapt);
  }
  if (port == 0) return http.bind_to_any_port(host);
  return http.bind_to_port(host, port) ? port : -1;
}

bool HttpService::listen() { return server_->http.listen_after_bind(); }

void HttpService::stop() { server_->http.stop(); }

}  // namespace nl2plan::service
