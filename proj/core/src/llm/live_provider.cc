#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "nl2plan/llm/digest.h"
#include "nl2plan/llm/provider.h"

namespace nl2plan::llm {

LiveProvider::LiveProvider(ProviderConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError("environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
}

ChatExchange LiveProvider::complete(const ChatRequest& request) {
  check_request(request);
  const std::string& url = config_.endpoint;
  size_t scheme = url.find("://");
  size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string host = slash == std::string::npos ? url : url.substr(0, slash);
  std::string base = slash == std::string::npos ? "" : url.substr(slash);
  while (!base.empty() && base.back() == '/') base.pop_back();

  httplib::Client client(host);
  auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_bearer_token_auth(api_key_);

  nlohmann::json body = {{"model", request.model.empty() ? config_.model : request.model},
                         {"messages", request.messages},
                         {"temperature", request.temperature}};
  std::optional<int> max_tokens = request.max_tokens ? request.max_tokens : config_.max_tokens;
  if (max_tokens) body["max_tokens"] = *max_tokens;

  auto res = client.Post(base + "/chat/completions", body.dump(), "application/json");
  if (!res) {
    throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 500));
  }
  ChatExchange e;
  e.request = request;
  e.request.model = body["model"];
  e.digest = request_digest(request);
  e.timestamp = utc_timestamp();
  try {
    auto j = nlohmann::json::parse(res->body);
    e.response = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      e.usage.input_tokens = j["usage"].value("prompt_tokens", 0L);
      e.usage.output_tokens = j["usage"].value("completion_tokens", 0L);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ProviderError(std::string("malformed provider response: ") + ex.what());
  }
  return e;
}

}  // namespace nl2plan::llm
