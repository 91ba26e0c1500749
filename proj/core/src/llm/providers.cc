#include "nl2plan/llm/provider.h"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "nl2plan/llm/digest.h"
#include "nl2plan/llm/transcript.h"

namespace nl2plan::llm {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::Live: return "live";
    case ProviderKind::Replay: return "replay";
    case ProviderKind::Record: return "record";
    case ProviderKind::Scripted: return "scripted";
  }
  return "replay";
}

std::optional<ProviderKind> provider_kind_from_string(std::string_view text) {
  for (ProviderKind k : {ProviderKind::Live, ProviderKind::Replay, ProviderKind::Record,
                         ProviderKind::Scripted}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

long estimate_tokens(std::string_view text) {
  return static_cast<long>((text.size() + 3) / 4);
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::string> config_problem(const ProviderConfig& config) {
  namespace fs = std::filesystem;
  switch (config.kind) {
    case ProviderKind::Replay:
      if (config.transcript_dir.empty()) return "replay needs a transcript directory";
      if (!fs::is_directory(config.transcript_dir)) {
        return "transcript directory " + config.transcript_dir.string() + " does not exist";
      }
      return std::nullopt;
    case ProviderKind::Scripted:
      if (!fs::is_regular_file(config.script_file)) {
        return "script file " + config.script_file.string() + " does not exist";
      }
      return std::nullopt;
    case ProviderKind::Record:
      if (config.transcript_dir.empty()) return "record needs a transcript directory";
      [[fallthrough]];
    case ProviderKind::Live: {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        return "environment variable " + config.api_key_env + " is not set";
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

ReplayProvider::ReplayProvider(const std::vector<ChatExchange>& transcript) {
  for (const auto& e : transcript) by_digest_[e.digest].items.push_back(e);
}

std::unique_ptr<ReplayProvider> ReplayProvider::from_directory(
    const std::filesystem::path& dir) {
  std::set<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl") files.insert(entry.path());
  }
  std::vector<ChatExchange> all;
  for (const auto& f : files) {
    auto part = read_transcript(f);
    all.insert(all.end(), part.begin(), part.end());
  }
  return std::make_unique<ReplayProvider>(all);
}

ChatExchange ReplayProvider::complete(const ChatRequest& request) {
  check_request(request);
  std::string digest = request_digest(request);
  std::lock_guard lock(mutex_);
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) throw ReplayMissError(digest, request.template_id);
  Entries& e = it->second;
  ChatExchange out = e.items[std::min(e.next, e.items.size() - 1)];
  if (e.next < e.items.size()) ++e.next;
  out.request = request;
  return out;
}

RecordingProvider::RecordingProvider(std::unique_ptr<Provider> inner,
                                     std::filesystem::path file)
    : inner_(std::move(inner)), file_(std::move(file)) {}

ChatExchange RecordingProvider::complete(const ChatRequest& request) {
  ChatExchange e = inner_->complete(request);
  std::lock_guard lock(mutex_);
  append_exchange(file_, e);
  return e;
}

ScriptedProvider::ScriptedProvider(std::string_view script, std::string timestamp)
    : timestamp_(std::move(timestamp)) {
  std::istringstream in{std::string(script)};
  std::string line;
  std::string id;
  std::string text;
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    if (!text.empty() && text.back() == '\n') text.pop_back();
    queues_[id].push_back(text);
    text.clear();
  };
  while (std::getline(in, line)) {
    if (line.rfind("=== ", 0) == 0) {
      flush();
      id = line.substr(4);
      while (!id.empty() && (id.back() == ' ' || id.back() == '\r')) id.pop_back();
      open = true;
    } else if (open) {
      text += line;
      text += '\n';
    }
  }
  flush();
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(
    const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ProviderError("cannot read script " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), {});
  return std::make_unique<ScriptedProvider>(text);
}

void ScriptedProvider::push(const std::string& template_id, std::string response) {
  std::lock_guard lock(mutex_);
  queues_[template_id].push_back(std::move(response));
}

std::map<std::string, size_t> ScriptedProvider::remaining() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, size_t> out;
  for (const auto& [id, q] : queues_) {
    if (!q.empty()) out[id] = q.size();
  }
  return out;
}

ChatExchange ScriptedProvider::complete(const ChatRequest& request) {
  check_request(request);
  ChatExchange e;
  {
    std::lock_guard lock(mutex_);
    auto it = queues_.find(request.template_id);
    if (it == queues_.end() || it->second.empty()) {
      throw ProviderError("script has no response left for " + request.template_id);
    }
    e.response = std::move(it->second.front());
    it->second.pop_front();
  }
  e.request = request;
  e.digest = request_digest(request);
  std::string prompt;
  for (const auto& m : request.messages) prompt += m.content;
  e.usage = {estimate_tokens(prompt), estimate_tokens(e.response)};
  e.timestamp = timestamp_;
  return e;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  if (auto problem = config_problem(config)) throw ProviderError(*problem);
  switch (config.kind) {
    case ProviderKind::Live:
      return std::make_unique<LiveProvider>(config);
    case ProviderKind::Replay:
      return ReplayProvider::from_directory(config.transcript_dir);
    case ProviderKind::Record:
      std::filesystem::create_directories(config.transcript_dir);
      return std::make_unique<RecordingProvider>(std::make_unique<LiveProvider>(config),
                                                 config.transcript_dir / "recorded.jsonl");
    case ProviderKind::Scripted:
      return ScriptedProvider::from_file(config.script_file);
  }
  throw ProviderError("unknown provider kind");
}

}  // namespace nl2plan::llm
