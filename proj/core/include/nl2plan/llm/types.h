#ifndef NL2PLAN_LLM_TYPES_H
#define NL2PLAN_LLM_TYPES_H

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nl2plan::llm {

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// template_id names the prompt the request was rendered from, e.g.
// "type_extraction" or "action_construction.revision". It is part of the
// replay key; the model name is not.
struct ChatRequest {
  std::string template_id;
  std::string step;
  std::vector<ChatMessage> messages;
  std::string model;
  double temperature = 0.0;
  std::optional<int> max_tokens;

  bool operator==(const ChatRequest&) const = default;
};

struct TokenUsage {
  long input_tokens = 0;
  long output_tokens = 0;

  long total() const { return input_tokens + output_tokens; }
  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct ChatExchange {
  std::string digest;
  ChatRequest request;
  std::string response;
  TokenUsage usage;
  std::string timestamp;

  bool operator==(const ChatExchange&) const = default;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayMissError : public ProviderError {
 public:
  explicit ReplayMissError(const std::string& digest, const std::string& template_id)
      : ProviderError("replay miss: no transcript entry for digest " + digest +
                      " (" + template_id + ")"),
        digest_(digest) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

// Throws std::invalid_argument unless temperature is in [0, 2] and any
// max_tokens is positive.
void check_request(const ChatRequest& request);

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const ChatRequest& r);
void from_json(const nlohmann::json& j, ChatRequest& r);
void to_json(nlohmann::json& j, const TokenUsage& u);
void from_json(const nlohmann::json& j, TokenUsage& u);
void to_json(nlohmann::json& j, const ChatExchange& e);
void from_json(const nlohmann::json& j, ChatExchange& e);

}  // namespace nl2plan::llm

#endif
