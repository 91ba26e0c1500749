#include "nl2plan/llm/types.h"

#include <nlohmann/json.hpp>

namespace nl2plan::llm {

void check_request(const ChatRequest& request) {
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw std::invalid_argument("temperature must be in [0, 2]");
  }
  if (request.max_tokens && *request.max_tokens <= 0) {
    throw std::invalid_argument("max_tokens must be positive");
  }
  if (request.messages.empty()) {
    throw std::invalid_argument("request has no messages");
  }
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
  j = {{"role", m.role}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
  j.at("role").get_to(m.role);
  j.at("content").get_to(m.content);
}

void to_json(nlohmann::json& j, const ChatRequest& r) {
  j = {{"template_id", r.template_id},
       {"step", r.step},
       {"messages", r.messages},
       {"model", r.model},
       {"temperature", r.temperature},
       {"max_tokens", nullptr}};
  if (r.max_tokens) j["max_tokens"] = *r.max_tokens;
}

void from_json(const nlohmann::json& j, ChatRequest& r) {
  j.at("template_id").get_to(r.template_id);
  r.step = j.value("step", std::string());
  j.at("messages").get_to(r.messages);
  r.model = j.value("model", std::string());
  r.temperature = j.value("temperature", 0.0);
  r.max_tokens.reset();
  if (j.contains("max_tokens") && !j.at("max_tokens").is_null()) {
    r.max_tokens = j.at("max_tokens").get<int>();
  }
}

void to_json(nlohmann::json& j, const TokenUsage& u) {
  j = {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}

void from_json(const nlohmann::json& j, TokenUsage& u) {
  j.at("input_tokens").get_to(u.input_tokens);
  j.at("output_tokens").get_to(u.output_tokens);
  if (u.input_tokens < 0 || u.output_tokens < 0) {
    throw std::invalid_argument("negative token count");
  }
}

void to_json(nlohmann::json& j, const ChatExchange& e) {
  j = {{"digest", e.digest},
       {"request", e.request},
       {"response", e.response},
       {"usage", e.usage},
       {"timestamp", e.timestamp}};
}

void from_json(const nlohmann::json& j, ChatExchange& e) {
  j.at("digest").get_to(e.digest);
  j.at("request").get_to(e.request);
  j.at("response").get_to(e.response);
  j.at("usage").get_to(e.usage);
  e.timestamp = j.value("timestamp", std::string());
}

}  // namespace nl2plan::llm
