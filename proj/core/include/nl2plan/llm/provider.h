#ifndef NL2PLAN_LLM_PROVIDER_H
#define NL2PLAN_LLM_PROVIDER_H

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "nl2plan/llm/types.h"

namespace nl2plan::llm {

// Scripted serves canned responses from a script file and is used to author
// transcripts and in tests.
enum class ProviderKind { Live, Replay, Record, Scripted };

std::string_view to_string(ProviderKind kind);
std::optional<ProviderKind> provider_kind_from_string(std::string_view text);

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Replay;
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";
  std::filesystem::path transcript_dir;
  std::filesystem::path script_file;
  std::optional<int> max_tokens;
  double timeout_seconds = 300.0;
};

// Empty when usable; otherwise what is missing (transcript directory, API
// key, script file).
std::optional<std::string> config_problem(const ProviderConfig& config);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatExchange complete(const ChatRequest& request) = 0;
};

// Serves transcript entries by digest. Entries sharing a digest are returned
// in file order; once used up the last one repeats.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::vector<ChatExchange>& transcript);
  // Reads every *.jsonl file in the directory, in name order.
  static std::unique_ptr<ReplayProvider> from_directory(
      const std::filesystem::path& dir);

  ChatExchange complete(const ChatRequest& request) override;

 private:
  struct Entries {
    std::vector<ChatExchange> items;
    size_t next = 0;
  };
  std::mutex mutex_;
  std::map<std::string, Entries> by_digest_;
};

// Forwards to another provider and appends every exchange to a JSON-lines
// file.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(std::unique_ptr<Provider> inner, std::filesystem::path file);

  ChatExchange complete(const ChatRequest& request) override;

 private:
  std::unique_ptr<Provider> inner_;
  std::filesystem::path file_;
  std::mutex mutex_;
};

// Responses are queued per template id and handed out in order. Token
// counts are estimated as ceil(bytes / 4) of the prompt and the response.
//
// Script format: each entry starts with a line `=== <template id>`; the
// following lines up to the next marker are the response, with the trailing
// newline dropped.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::string_view script,
                            std::string timestamp = "2024-01-01T00:00:00Z");
  static std::unique_ptr<ScriptedProvider> from_file(
      const std::filesystem::path& file);

  void push(const std::string& template_id, std::string response);
  // Responses left unused, per template id.
  std::map<std::string, size_t> remaining() const;

  ChatExchange complete(const ChatRequest& request) override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> queues_;
  std::string timestamp_;
};

// OpenAI-compatible chat-completions client. The key is read from the
// environment variable named in the config.
class LiveProvider : public Provider {
 public:
  explicit LiveProvider(ProviderConfig config);

  ChatExchange complete(const ChatRequest& request) override;

 private:
  ProviderConfig config_;
  std::string api_key_;
};

// Record mode wraps a live provider. Throws ProviderError when
// config_problem() reports something.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

long estimate_tokens(std::string_view text);
// UTC, second precision, e.g. 2024-05-01T12:00:00Z.
std::string utc_timestamp();

}  // namespace nl2plan::llm

#endif
