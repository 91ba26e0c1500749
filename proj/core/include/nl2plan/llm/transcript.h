#ifndef NL2PLAN_LLM_TRANSCRIPT_H
#define NL2PLAN_LLM_TRANSCRIPT_H

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nl2plan/llm/types.h"

namespace nl2plan::llm {

// One ChatExchange per line. Blank lines are skipped; a malformed line
// throws std::runtime_error naming the file and line number.
std::vector<ChatExchange> read_transcript(const std::filesystem::path& file);
void append_exchange(const std::filesystem::path& file, const ChatExchange& exchange);
std::string exchange_line(const ChatExchange& exchange);

struct UsageReport {
  std::map<std::string, TokenUsage> steps;
  TokenUsage total;
  size_t exchanges = 0;

  bool operator==(const UsageReport&) const = default;
};

// Sums input and output tokens per request step.
UsageReport usage_totals(const std::vector<ChatExchange>& exchanges);

// {"steps": {name: {input_tokens, output_tokens, total}}, "total": {...},
//  "exchanges": n}
void to_json(nlohmann::json& j, const UsageReport& report);
void from_json(const nlohmann::json& j, UsageReport& report);

}  // namespace nl2plan::llm

#endif
