#ifndef NL2PLAN_PIPELINE_CONFIG_H
#define NL2PLAN_PIPELINE_CONFIG_H

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "nl2plan/llm/provider.h"
#include "nl2plan/planner/search.h"

namespace nl2plan::pipeline {

enum class StepId {
  TypeExtraction = 1,
  TypeHierarchy = 2,
  ActionExtraction = 3,
  ActionConstruction = 4,
  TaskExtraction = 5,
  Planning = 6,
};

inline constexpr int kStepCount = 6;

// "type_extraction", ..., "planning".
std::string_view to_string(StepId step);
// Accepts the name or the step number.
std::optional<StepId> step_from_string(std::string_view text);
inline int step_number(StepId step) { return static_cast<int>(step); }
StepId step_at(int number);
inline bool uses_llm(StepId step) { return step != StepId::Planning; }

enum class FeedbackSource { None, Llm, Human };

std::string_view to_string(FeedbackSource source);
std::optional<FeedbackSource> feedback_from_string(std::string_view text);

struct RunConfig {
  std::map<StepId, FeedbackSource> feedback;
  int max_validator_messages = 8;
  int max_task_validations = 8;
  StepId start_step = StepId::TypeExtraction;
  double temperature = 0.0;
  llm::ProviderConfig provider;
  planner::PlannerOptions planner;

  FeedbackSource feedback_for(StepId step) const;
  void set_feedback(FeedbackSource source);
};

// Empty when the config is usable.
std::optional<std::string> config_error(const RunConfig& config);

// Key/value text with [provider], [pipeline] and [planner] sections:
//
//   [provider]
//   kind = "live"
//   model = "gpt-4"
//   [pipeline]
//   feedback = "llm"
//
// Relative paths are resolved against base_dir. Throws std::invalid_argument
// with the line number on unknown keys or bad values.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir,
                            RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& file, RunConfig base = {});

void to_json(nlohmann::json& j, const RunConfig& config);
// Missing keys keep their defaults. Throws std::invalid_argument.
void from_json(const nlohmann::json& j, RunConfig& config);

}  // namespace nl2plan::pipeline

#endif
