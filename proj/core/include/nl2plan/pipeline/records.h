#ifndef NL2PLAN_PIPELINE_RECORDS_H
#define NL2PLAN_PIPELINE_RECORDS_H

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nl2plan/llm/types.h"
#include "nl2plan/pipeline/config.h"
#include "nl2plan/validate/validator.h"

namespace nl2plan::pipeline {

// One LLM call made while running a step. purpose is one of "main",
// "format-retry", "validator-revision", "feedback", "feedback-revision".
struct CallRecord {
  std::string purpose;
  std::string template_id;
  std::string action;
  int pass = 0;
  std::string prompt;
  std::string response;
  std::string digest;
  llm::TokenUsage usage;

  bool operator==(const CallRecord&) const = default;
};

// outcome: "no-feedback" (sentinel), "approved" (human), "revised" (one
// regeneration happened) or "pending" (waiting for a human).
struct FeedbackRound {
  FeedbackSource source = FeedbackSource::None;
  std::string outcome;
  std::string text;

  bool operator==(const FeedbackRound&) const = default;
};

struct ActionPass {
  int pass = 0;
  int drafts = 0;
  int validator_messages = 0;
  bool accepted_flawed = false;
  std::vector<validate::ValidationReport> reports;
  std::string prompt;    // first prompt of the pass
  std::string response;  // response holding the accepted block
  std::string block;     // accepted draft, printed

  bool operator==(const ActionPass&) const = default;
};

struct ActionRecord {
  std::string name;
  std::vector<ActionPass> passes;
  std::optional<FeedbackRound> feedback;

  bool operator==(const ActionRecord&) const = default;
};

enum class StepStatus { Done, AwaitingFeedback };

struct StepRecord {
  StepId step = StepId::TypeExtraction;
  StepStatus status = StepStatus::Done;
  std::string prompt;    // main prompt of the step
  std::string response;  // response the artifact was parsed from
  std::vector<CallRecord> calls;
  nlohmann::json artifact;
  nlohmann::json original_artifact;  // before a feedback regeneration
  std::optional<FeedbackRound> feedback;
  std::vector<validate::ValidationReport> validations;
  std::vector<ActionRecord> actions;
  std::vector<std::string> warnings;
  bool degraded = false;
  std::optional<std::string> edit;  // user-supplied text the artifact came from

  bool operator==(const StepRecord&) const = default;
};

enum class RunStatus { Running, AwaitingHumanFeedback, Done, Failed };

std::string_view to_string(RunStatus status);
std::optional<RunStatus> run_status_from_string(std::string_view text);
std::string_view to_string(StepStatus status);

struct RunManifest {
  std::string id;
  std::string created;
  std::string description;
  // Description used from task extraction on, when it differs.
  std::optional<std::string> task_description;
  RunConfig config;
  RunStatus status = RunStatus::Running;
  std::optional<StepId> current_step;
  std::vector<int> completed_steps;
  std::string error;
  std::string outcome;  // planner outcome once planning ran
  bool degraded = false;
  std::vector<std::string> files;
  int superseded = 0;

  const std::string& description_for(StepId step) const;
};

// Text shown for an unsolvable task.
inline constexpr std::string_view kNoPlanFound = "No plan found";

void to_json(nlohmann::json& j, const CallRecord& r);
void from_json(const nlohmann::json& j, CallRecord& r);
void to_json(nlohmann::json& j, const FeedbackRound& r);
void from_json(const nlohmann::json& j, FeedbackRound& r);
void to_json(nlohmann::json& j, const ActionPass& r);
void from_json(const nlohmann::json& j, ActionPass& r);
void to_json(nlohmann::json& j, const ActionRecord& r);
void from_json(const nlohmann::json& j, ActionRecord& r);
void to_json(nlohmann::json& j, const StepRecord& r);
void from_json(const nlohmann::json& j, StepRecord& r);
void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

}  // namespace nl2plan::pipeline

#endif
