#ifndef NL2PLAN_SERVICE_RUN_MANAGER_H
#define NL2PLAN_SERVICE_RUN_MANAGER_H

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nl2plan/llm/provider.h"
#include "nl2plan/pipeline/pipeline.h"

namespace nl2plan::service {

// Error returned to API clients. `code` is one of api_error_codes().
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  nlohmann::json to_json() const;

 private:
  int status_;
  std::string code_;
};

// code -> HTTP status
const std::map<std::string, int>& api_error_codes();

using ProviderFactory =
    std::function<std::unique_ptr<llm::Provider>(const pipeline::RunConfig&)>;

struct ServiceOptions {
  std::filesystem::path root;
  pipeline::RunConfig base_config;
  // Oldest runs beyond this many are deleted when a run is created; 0 keeps all.
  size_t keep = 0;
  // Defaults to llm::make_provider.
  ProviderFactory provider_factory;
};

// Owns the runs below `root`, one directory per run id. Mutations of a run
// are serialized by its lock; reads go to the persisted files only. Pending
// steps run on a worker thread per run.
class RunManager {
 public:
  explicit RunManager(ServiceOptions options);
  ~RunManager();
  RunManager(const RunManager&) = delete;
  RunManager& operator=(const RunManager&) = delete;

  // Body: {description, task_description?, config?, domain?, problem?}.
  pipeline::RunManifest create(const nlohmann::json& body);

  std::vector<pipeline::RunManifest> list() const;
  pipeline::RunManifest manifest(std::string_view id) const;
  nlohmann::json step(std::string_view id, std::string_view step) const;
  // Superseded versions of a step, oldest first: [{superseded, record}].
  nlohmann::json step_history(std::string_view id, std::string_view step) const;
  nlohmann::json plan(std::string_view id) const;
  nlohmann::json usage(std::string_view id) const;

  // Body: {action: "approve" | "feedback" | "edit", text?}.
  pipeline::RunManifest feedback(std::string_view id, std::string_view step,
                                 const nlohmann::json& body);
  // Body: {step?, edit?, task_description?}.
  pipeline::RunManifest resume(std::string_view id, const nlohmann::json& body);

  // Blocks until no worker is running for the run (or for any run).
  void wait(std::string_view id);
  void wait_all();

  const std::filesystem::path& root() const { return options_.root; }

 private:
  struct Slot;

  std::shared_ptr<Slot> slot(std::string_view id) const;
  std::shared_ptr<Slot> add_slot(const std::string& id);
  llm::Provider& provider_for(Slot& slot, const pipeline::RunConfig& config);
  void launch(const std::shared_ptr<Slot>& slot);
  void prune(const std::string& keep_id);
  std::filesystem::path dir_of(std::string_view id) const;
  pipeline::StepId parse_step(const pipeline::RunManifest& m, std::string_view text) const;

  ServiceOptions options_;
  mutable std::mutex slots_mutex_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> slots_;
};

}  // namespace nl2plan::service

#endif
