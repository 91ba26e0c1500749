#ifndef NL2PLAN_PIPELINE_PIPELINE_H
#define NL2PLAN_PIPELINE_PIPELINE_H

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "nl2plan/llm/provider.h"
#include "nl2plan/llm/templates.h"
#include "nl2plan/pddl/model.h"
#include "nl2plan/pipeline/records.h"
#include "nl2plan/pipeline/run_store.h"
#include "nl2plan/pipeline/step_output.h"

namespace nl2plan::pipeline {

// A step could not produce its artifact: unparseable output after the
// retry, a provider failure, or a planner resource limit.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(StepId step, const std::string& message)
      : std::runtime_error(std::string(to_string(step)) + ": " + message), step_(step) {}
  StepId step() const { return step_; }

 private:
  StepId step_;
};

// An edited artifact that breaks the step's structural invariants.
class EditError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The run is not in a state that allows the request, e.g. feedback for a
// step that is not waiting for it.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct StepState;

struct RunInputs {
  std::string id;  // generated when empty
  std::string description;
  std::optional<std::string> task_description;
  RunConfig config;
  // Required when the run starts at task extraction or planning.
  std::optional<std::string> domain_text;
  // Required when the run starts at planning.
  std::optional<std::string> problem_text;
};

// Writes the manifest (and any supplied domain/problem) into an empty or
// missing directory. Throws std::invalid_argument for an empty description,
// a bad config or missing inputs, and EditError for inputs that do not parse.
RunManifest create_run(const std::filesystem::path& dir, const RunInputs& inputs);

std::string new_run_id();

struct HumanInput {
  enum class Kind { Approve, Feedback, Edit };
  Kind kind = Kind::Approve;
  std::string text;
};

// Drives one persisted run. Every completed step is written to the store
// before the next one starts, so a fresh Pipeline over the same directory
// continues where a killed process stopped.
class Pipeline {
 public:
  Pipeline(const RunStore& store, llm::Provider& provider,
           const llm::TemplateLibrary& templates = default_templates());

  static const llm::TemplateLibrary& default_templates();

  // Called after each step record is written.
  void set_after_step(std::function<void(StepId)> hook) { after_step_ = std::move(hook); }

  // When off, submit_feedback() and resume() only apply the change and leave
  // the remaining steps to a later advance().
  void set_auto_advance(bool on) { auto_advance_ = on; }

  // Runs pending steps until the run is done, failed, or waiting for a
  // human. Failures are recorded in the manifest, not thrown.
  RunManifest advance();

  // Human feedback for the step the run is parked at. Approve keeps the
  // artifact, Feedback causes exactly one regeneration, Edit replaces the
  // artifact as resume() does. Throws StateError or EditError.
  RunManifest submit_feedback(StepId step, const HumanInput& input);

  // Without a step, continues an interrupted run. With one, supersedes the
  // records from that step on and re-executes them; an edit replaces the
  // step's artifact first and execution continues after it. A new task
  // description applies from task extraction on.
  RunManifest resume(std::optional<StepId> from, std::optional<std::string> edit = {},
                     std::optional<std::string> task_description = {});

 private:
  void run_step(RunManifest& m, StepId step);
  void finish_step(RunManifest& m, StepState& st);
  void continue_step(RunManifest& m, StepId step, const HumanInput& input);
  StepRecord edited_record(const RunManifest& m, StepId step, const std::string& text) const;
  void write_outputs(const StepRecord& record);
  void refresh(RunManifest& m) const;

  const RunStore& store_;
  llm::Provider& provider_;
  const llm::TemplateLibrary& templates_;
  std::function<void(StepId)> after_step_;
  bool auto_advance_ = true;
};

// create_run followed by advance.
RunManifest run_pipeline(const std::filesystem::path& dir, const RunInputs& inputs,
                         llm::Provider& provider);

// Problem from a task draft: atoms of the initial state are kept, anything
// else is dropped and reported in warnings.
pddl::ProblemSpec to_problem(const pddl::TaskDraft& draft, const pddl::DomainSpec& domain,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace nl2plan::pipeline

#endif
