#ifndef NL2PLAN_PIPELINE_RUN_STORE_H
#define NL2PLAN_PIPELINE_RUN_STORE_H

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nl2plan/llm/transcript.h"
#include "nl2plan/pipeline/records.h"

namespace nl2plan::pipeline {

// Writes to a sibling temporary file and renames it over the target, so a
// reader sees either the old or the new content.
void atomic_write(const std::filesystem::path& file, std::string_view text);
std::string read_text(const std::filesystem::path& file);

// Run directory layout:
//   manifest.json              RunManifest
//   step_<n>.json              StepRecord
//   transcripts/step_<n>.jsonl exchanges made by step n
//   domain.pddl problem.pddl   step 4 and 5 outputs (or inputs when a run
//                              starts later)
//   plan.txt | NO_PLAN         step 6 output
//   usage.json                 token usage of the current step records
//   superseded/<k>/            records replaced by the k-th resume
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  bool exists() const;

  RunManifest load_manifest() const;
  // Refreshes the file index before writing.
  void save_manifest(RunManifest& manifest) const;

  std::optional<StepRecord> load_step(StepId step) const;
  void save_step(const StepRecord& record,
                 const std::vector<llm::ChatExchange>& exchanges) const;
  std::vector<llm::ChatExchange> load_exchanges(StepId step) const;
  std::vector<llm::ChatExchange> all_exchanges() const;

  void write_file(std::string_view name, std::string_view text) const;
  std::optional<std::string> read_file(std::string_view name) const;
  void remove_file(std::string_view name) const;

  // Moves the records of steps >= from, and the files those steps wrote,
  // into superseded/<seq>/. Inputs supplied at run creation stay.
  void supersede(StepId from, int seq) const;

  llm::UsageReport write_usage() const;

  static std::string step_file(StepId step);
  static std::string transcript_file(StepId step);
  // Files written by a step.
  static std::vector<std::string> outputs_of(StepId step);

 private:
  std::filesystem::path dir_;
};

}  // namespace nl2plan::pipeline

#endif
