#include "nl2plan/pipeline/records.h"

namespace nl2plan::pipeline {

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

StepId step_value(const nlohmann::json& j) {
  auto s = step_from_string(j.get<std::string>());
  if (!s) throw std::invalid_argument("unknown step " + j.dump());
  return *s;
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Running: return "running";
    case RunStatus::AwaitingHumanFeedback: return "awaiting-human-feedback";
    case RunStatus::Done: return "done";
    case RunStatus::Failed: return "failed";
  }
  return "failed";
}

std::optional<RunStatus> run_status_from_string(std::string_view text) {
  for (auto s : {RunStatus::Running, RunStatus::AwaitingHumanFeedback, RunStatus::Done,
                 RunStatus::Failed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(StepStatus status) {
  return status == StepStatus::Done ? "done" : "awaiting-feedback";
}

const std::string& RunManifest::description_for(StepId step) const {
  if (task_description && step >= StepId::TaskExtraction) return *task_description;
  return description;
}

void to_json(nlohmann::json& j, const CallRecord& r) {
  j = {{"purpose", r.purpose}, {"template_id", r.template_id}, {"action", r.action},
       {"pass", r.pass},       {"prompt", r.prompt},           {"response", r.response},
       {"digest", r.digest},   {"usage", r.usage}};
}

void from_json(const nlohmann::json& j, CallRecord& r) {
  j.at("purpose").get_to(r.purpose);
  j.at("template_id").get_to(r.template_id);
  j.at("action").get_to(r.action);
  j.at("pass").get_to(r.pass);
  j.at("prompt").get_to(r.prompt);
  j.at("response").get_to(r.response);
  j.at("digest").get_to(r.digest);
  j.at("usage").get_to(r.usage);
}

void to_json(nlohmann::json& j, const FeedbackRound& r) {
  j = {{"source", to_string(r.source)}, {"outcome", r.outcome}, {"text", r.text}};
}

void from_json(const nlohmann::json& j, FeedbackRound& r) {
  auto s = feedback_from_string(j.at("source").get<std::string>());
  if (!s) throw std::invalid_argument("unknown feedback source");
  r.source = *s;
  j.at("outcome").get_to(r.outcome);
  j.at("text").get_to(r.text);
}

void to_json(nlohmann::json& j, const ActionPass& r) {
  j = {{"pass", r.pass},
       {"drafts", r.drafts},
       {"validator_messages", r.validator_messages},
       {"accepted_flawed", r.accepted_flawed},
       {"reports", r.reports},
       {"prompt", r.prompt},
       {"response", r.response},
       {"block", r.block}};
}

void from_json(const nlohmann::json& j, ActionPass& r) {
  j.at("pass").get_to(r.pass);
  j.at("drafts").get_to(r.drafts);
  j.at("validator_messages").get_to(r.validator_messages);
  j.at("accepted_flawed").get_to(r.accepted_flawed);
  j.at("reports").get_to(r.reports);
  j.at("prompt").get_to(r.prompt);
  j.at("response").get_to(r.response);
  j.at("block").get_to(r.block);
}

void to_json(nlohmann::json& j, const ActionRecord& r) {
  j = {{"name", r.name}, {"passes", r.passes}, {"feedback", optional_json(r.feedback)}};
}

void from_json(const nlohmann::json& j, ActionRecord& r) {
  j.at("name").get_to(r.name);
  j.at("passes").get_to(r.passes);
  r.feedback = optional_from<FeedbackRound>(j, "feedback");
}

void to_json(nlohmann::json& j, const StepRecord& r) {
  j = {{"step", step_number(r.step)},
       {"name", to_string(r.step)},
       {"status", to_string(r.status)},
       {"prompt", r.prompt},
       {"response", r.response},
       {"calls", r.calls},
       {"artifact", r.artifact},
       {"original_artifact", r.original_artifact},
       {"feedback", optional_json(r.feedback)},
       {"validations", r.validations},
       {"actions", r.actions},
       {"warnings", r.warnings},
       {"degraded", r.degraded},
       {"edit", optional_json(r.edit)}};
}

void from_json(const nlohmann::json& j, StepRecord& r) {
  r.step = step_at(j.at("step").get<int>());
  r.status = j.at("status").get<std::string>() == "done" ? StepStatus::Done
                                                         : StepStatus::AwaitingFeedback;
  j.at("prompt").get_to(r.prompt);
  j.at("response").get_to(r.response);
  j.at("calls").get_to(r.calls);
  r.artifact = j.at("artifact");
  r.original_artifact = j.at("original_artifact");
  r.feedback = optional_from<FeedbackRound>(j, "feedback");
  j.at("validations").get_to(r.validations);
  j.at("actions").get_to(r.actions);
  j.at("warnings").get_to(r.warnings);
  j.at("degraded").get_to(r.degraded);
  r.edit = optional_from<std::string>(j, "edit");
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = {{"id", m.id},
       {"created", m.created},
       {"description", m.description},
       {"task_description", optional_json(m.task_description)},
       {"config", m.config},
       {"status", to_string(m.status)},
       {"current_step", m.current_step ? nlohmann::json(to_string(*m.current_step))
                                       : nlohmann::json(nullptr)},
       {"completed_steps", m.completed_steps},
       {"error", m.error},
       {"outcome", m.outcome},
       {"degraded", m.degraded},
       {"files", m.files},
       {"superseded", m.superseded}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("id").get_to(m.id);
  j.at("created").get_to(m.created);
  j.at("description").get_to(m.description);
  m.task_description = optional_from<std::string>(j, "task_description");
  m.config = j.at("config").get<RunConfig>();
  auto s = run_status_from_string(j.at("status").get<std::string>());
  if (!s) throw std::invalid_argument("unknown run status");
  m.status = *s;
  m.current_step.reset();
  if (!j.at("current_step").is_null()) m.current_step = step_value(j.at("current_step"));
  j.at("completed_steps").get_to(m.completed_steps);
  j.at("error").get_to(m.error);
  j.at("outcome").get_to(m.outcome);
  j.at("degraded").get_to(m.degraded);
  j.at("files").get_to(m.files);
  j.at("superseded").get_to(m.superseded);
}

}  // namespace nl2plan::pipeline
