#include "nl2plan/service/run_manager.h"

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <iostream>
#include <thread>

#include "nl2plan/llm/transcript.h"

namespace nl2plan::service {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::RunManifest;
using pipeline::RunStatus;
using pipeline::RunStore;
using pipeline::StepId;

struct RunManager::Slot {
  std::string id;
  std::mutex lock;  // per-run lock, held for every mutation
  std::mutex state;
  std::condition_variable idle;
  bool busy = false;
  std::thread worker;
  std::unique_ptr<llm::Provider> provider;
};

json ApiError::to_json() const {
  return {{"error", {{"status", status_}, {"code", code_}, {"message", what()}}}};
}

const std::map<std::string, int>& api_error_codes() {
  static const std::map<std::string, int> codes = {
      {"invalid-request", 400},     {"empty-description", 400},
      {"missing-domain", 400},      {"missing-problem", 400},
      {"invalid-config", 400},      {"invalid-domain", 400},
      {"not-found", 404},           {"run-not-found", 404},
      {"step-not-found", 404},      {"method-not-allowed", 405},
      {"step-not-reached", 409},    {"not-awaiting-feedback", 409},
      {"run-busy", 409},            {"plan-not-ready", 409},
      {"invalid-edit", 422},        {"internal", 500},
      {"provider-unavailable", 503},
  };
  return codes;
}

namespace {

ApiError api_error(const std::string& code, const std::string& message) {
  return ApiError(api_error_codes().at(code), code, message);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::optional<std::string> optional_string(const json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  if (!body.at(key).is_string()) {
    throw api_error("invalid-request", std::string(key) + " must be a string");
  }
  return body.at(key).get<std::string>();
}

void check_object(const json& body, std::initializer_list<const char*> keys) {
  if (!body.is_object()) throw api_error("invalid-request", "the body must be a JSON object");
  for (const auto& [k, v] : body.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      throw api_error("invalid-request", "unknown field " + k);
    }
  }
}

bool valid_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

}  // namespace

RunManager::RunManager(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.provider_factory) {
    options_.provider_factory = [](const pipeline::RunConfig& c) { return llm::make_provider(c.provider); };
  }
  fs::create_directories(options_.root);
  std::vector<std::shared_ptr<Slot>> relaunch;
  for (const auto& entry : fs::directory_iterator(options_.root)) {
    if (!entry.is_directory()) continue;
    RunStore store(entry.path());
    if (!store.exists()) continue;
    try {
      RunManifest m = store.load_manifest();
      auto s = add_slot(entry.path().filename().string());
      if (m.status == RunStatus::Running) relaunch.push_back(s);
    } catch (const std::exception& e) {
      std::cerr << "skipping run " << entry.path() << ": " << e.what() << "\n";
    }
  }
  for (const auto& s : relaunch) launch(s);
}

RunManager::~RunManager() {
  std::vector<std::shared_ptr<Slot>> all;
  {
    std::lock_guard g(slots_mutex_);
    for (const auto& [id, s] : slots_) all.push_back(s);
  }
  for (const auto& s : all) {
    std::thread t;
    {
      std::unique_lock g(s->state);
      s->idle.wait(g, [&] { return !s->busy; });
      t = std::move(s->worker);
    }
    if (t.joinable()) t.join();
  }
}

fs::path RunManager::dir_of(std::string_view id) const { return options_.root / std::string(id); }

std::shared_ptr<RunManager::Slot> RunManager::slot(std::string_view id) const {
  std::lock_guard g(slots_mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw api_error("run-not-found", "no run " + std::string(id));
  return it->second;
}

std::shared_ptr<RunManager::Slot> RunManager::add_slot(const std::string& id) {
  std::lock_guard g(slots_mutex_);
  auto& s = slots_[id];
  if (!s) {
    s = std::make_shared<Slot>();
    s->id = id;
  }
  return s;
}

llm::Provider& RunManager::provider_for(Slot& s, const pipeline::RunConfig& config) {
  if (!s.provider) {
    try {
      s.provider = options_.provider_factory(config);
    } catch (const std::exception& e) {
      throw api_error("provider-unavailable", e.what());
    }
  }
  return *s.provider;
}

// The worker takes the run lock itself.
void RunManager::launch(const std::shared_ptr<Slot>& s) {
  std::lock_guard g(s->state);
  if (s->busy) return;
  if (s->worker.joinable()) s->worker.join();
  s->busy = true;
  fs::path dir = dir_of(s->id);
  s->worker = std::thread([this, s, dir] {
    {
      std::lock_guard run_lock(s->lock);
      try {
        RunStore store(dir);
        RunManifest m = store.load_manifest();
        llm::Provider& provider = provider_for(*s, m.config);
        pipeline::Pipeline(store, provider).advance();
      } catch (const std::exception& e) {
        try {
          RunStore store(dir);
          RunManifest m = store.load_manifest();
          m.status = RunStatus::Failed;
          m.error = e.what();
          store.save_manifest(m);
        } catch (const std::exception&) {
        }
      }
    }
    std::lock_guard sg(s->state);
    s->busy = false;
    s->idle.notify_all();
  });
}

void RunManager::wait(std::string_view id) {
  auto s = slot(id);
  std::unique_lock g(s->state);
  s->idle.wait(g, [&] { return !s->busy; });
}

void RunManager::wait_all() {
  std::vector<std::string> ids;
  {
    std::lock_guard g(slots_mutex_);
    for (const auto& [id, s] : slots_) ids.push_back(id);
  }
  for (const auto& id : ids) wait(id);
}

RunManifest RunManager::create(const json& body) {
  check_object(body, {"description", "task_description", "config", "domain", "problem"});
  pipeline::RunInputs in;
  in.config = options_.base_config;
  if (body.contains("config") && !body.at("config").is_null()) {
    try {
      pipeline::from_json(body.at("config"), in.config);
    } catch (const std::exception& e) {
      throw api_error("invalid-config", e.what());
    }
  }
  if (auto err = pipeline::config_error(in.config)) throw api_error("invalid-config", *err);
  in.description = optional_string(body, "description").value_or("");
  in.task_description = optional_string(body, "task_description");
  in.domain_text = optional_string(body, "domain");
  in.problem_text = optional_string(body, "problem");
  if (blank(in.description)) throw api_error("empty-description", "the description is empty");
  if (in.config.start_step >= StepId::TaskExtraction && !in.domain_text) {
    throw api_error("missing-domain", "starting at " + std::string(to_string(in.config.start_step)) +
                                          " needs a domain");
  }
  if (in.config.start_step == StepId::Planning && !in.problem_text) {
    throw api_error("missing-problem", "starting at planning needs a problem");
  }
  std::unique_ptr<llm::Provider> provider;
  try {
    provider = options_.provider_factory(in.config);
  } catch (const std::exception& e) {
    throw api_error("provider-unavailable", e.what());
  }
  in.id = pipeline::new_run_id();
  RunManifest m;
  try {
    m = pipeline::create_run(dir_of(in.id), in);
  } catch (const pipeline::EditError& e) {
    std::error_code ec;
    fs::remove_all(dir_of(in.id), ec);
    throw api_error("invalid-domain", e.what());
  } catch (const std::invalid_argument& e) {
    throw api_error("invalid-request", e.what());
  }
  auto s = add_slot(m.id);
  {
    std::lock_guard g(s->lock);
    s->provider = std::move(provider);
  }
  launch(s);
  prune(m.id);
  return m;
}

void RunManager::prune(const std::string& keep_id) {
  if (options_.keep == 0) return;
  std::vector<std::pair<RunManifest, std::shared_ptr<Slot>>> runs;
  {
    std::lock_guard g(slots_mutex_);
    for (const auto& [id, s] : slots_) {
      try {
        runs.emplace_back(RunStore(dir_of(id)).load_manifest(), s);
      } catch (const std::exception&) {
      }
    }
  }
  if (runs.size() <= options_.keep) return;
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.created, a.first.id) < std::tie(b.first.created, b.first.id);
  });
  size_t excess = runs.size() - options_.keep;
  for (auto& [m, s] : runs) {
    if (excess == 0) break;
    if (m.id == keep_id) continue;
    {
      std::lock_guard g(s->state);
      if (s->busy) continue;
      if (s->worker.joinable()) s->worker.join();
    }
    {
      std::lock_guard g(slots_mutex_);
      slots_.erase(m.id);
    }
    std::error_code ec;
    fs::remove_all(dir_of(m.id), ec);
    --excess;
  }
}

std::vector<RunManifest> RunManager::list() const {
  std::vector<std::string> ids;
  {
    std::lock_guard g(slots_mutex_);
    for (const auto& [id, s] : slots_) ids.push_back(id);
  }
  std::vector<RunManifest> out;
  for (const auto& id : ids) {
    try {
      out.push_back(RunStore(dir_of(id)).load_manifest());
    } catch (const std::exception&) {
    }
  }
  std::sort(out.begin(), out.end(), [](const RunManifest& a, const RunManifest& b) {
    return std::tie(a.created, a.id) < std::tie(b.created, b.id);
  });
  return out;
}

RunManifest RunManager::manifest(std::string_view id) const {
  if (!valid_id(id)) throw api_error("run-not-found", "no run " + std::string(id));
  slot(id);
  return RunStore(dir_of(id)).load_manifest();
}

StepId RunManager::parse_step(const RunManifest& m, std::string_view text) const {
  auto step = pipeline::step_from_string(text);
  if (!step) throw api_error("step-not-found", "no step " + std::string(text));
  if (*step < m.config.start_step) {
    throw api_error("step-not-found", "run " + m.id + " starts at " +
                                          std::string(to_string(m.config.start_step)));
  }
  return *step;
}

json RunManager::step(std::string_view id, std::string_view text) const {
  RunManifest m = manifest(id);
  StepId s = parse_step(m, text);
  auto rec = RunStore(dir_of(id)).load_step(s);
  if (!rec) {
    throw api_error("step-not-reached", "step " + std::string(to_string(s)) + " has not run yet");
  }
  return *rec;
}

json RunManager::step_history(std::string_view id, std::string_view text) const {
  RunManifest m = manifest(id);
  StepId s = parse_step(m, text);
  json out = json::array();
  for (int k = 1; k <= m.superseded; ++k) {
    fs::path f = dir_of(id) / "superseded" / std::to_string(k) / RunStore::step_file(s);
    if (!fs::exists(f)) continue;
    out.push_back({{"superseded", k}, {"record", json::parse(pipeline::read_text(f))}});
  }
  return out;
}

json RunManager::plan(std::string_view id) const {
  RunManifest m = manifest(id);
  if (m.outcome.empty()) throw api_error("plan-not-ready", "planning has not finished");
  RunStore store(dir_of(id));
  auto rec = store.load_step(StepId::Planning);
  if (!rec) throw api_error("plan-not-ready", "planning has not finished");
  json out = {{"outcome", m.outcome},
              {"message", rec->artifact.value("message", "")},
              {"plan", rec->artifact.value("plan", json())},
              {"cost", rec->artifact.value("cost", json())},
              {"valid", rec->artifact.value("plan_valid", false)}};
  return out;
}

json RunManager::usage(std::string_view id) const {
  manifest(id);
  auto text = RunStore(dir_of(id)).read_file("usage.json");
  if (!text) return llm::UsageReport{};
  return json::parse(*text);
}

RunManifest RunManager::feedback(std::string_view id, std::string_view text, const json& body) {
  auto s = slot(id);
  check_object(body, {"action", "text"});
  pipeline::HumanInput input;
  std::string action = optional_string(body, "action").value_or("");
  if (action == "approve") {
    input.kind = pipeline::HumanInput::Kind::Approve;
  } else if (action == "feedback" || action == "edit") {
    input.kind = action == "edit" ? pipeline::HumanInput::Kind::Edit : pipeline::HumanInput::Kind::Feedback;
    input.text = optional_string(body, "text").value_or("");
    if (blank(input.text)) throw api_error("invalid-request", action + " needs a non-empty text");
  } else {
    throw api_error("invalid-request", "action must be approve, feedback or edit");
  }
  RunManifest m;
  {
    std::unique_lock g(s->lock, std::try_to_lock);
    if (!g.owns_lock()) throw api_error("not-awaiting-feedback", "the run is executing a step");
    RunStore store(dir_of(id));
    m = store.load_manifest();
    StepId step = parse_step(m, text);
    if (m.status != RunStatus::AwaitingHumanFeedback || m.current_step != step) {
      throw api_error("not-awaiting-feedback",
                      "run is not waiting for feedback on " + std::string(to_string(step)));
    }
    pipeline::Pipeline pipe(store, provider_for(*s, m.config));
    pipe.set_auto_advance(false);
    try {
      m = pipe.submit_feedback(step, input);
    } catch (const pipeline::EditError& e) {
      throw api_error("invalid-edit", e.what());
    } catch (const pipeline::StateError& e) {
      throw api_error("not-awaiting-feedback", e.what());
    } catch (const std::invalid_argument& e) {
      throw api_error("invalid-request", e.what());
    }
  }
  if (m.status == RunStatus::Running) launch(s);
  return m;
}

RunManifest RunManager::resume(std::string_view id, const json& body) {
  auto s = slot(id);
  check_object(body, {"step", "edit", "task_description"});
  RunManifest m;
  {
    std::unique_lock g(s->lock, std::try_to_lock);
    if (!g.owns_lock()) throw api_error("run-busy", "the run is executing a step");
    RunStore store(dir_of(id));
    m = store.load_manifest();
    std::optional<StepId> from;
    if (body.contains("step") && !body.at("step").is_null()) {
      const json& v = body.at("step");
      from = parse_step(m, v.is_number_integer() ? std::to_string(v.get<int>())
                                                  : v.is_string() ? v.get<std::string>() : "");
    }
    pipeline::Pipeline pipe(store, provider_for(*s, m.config));
    pipe.set_auto_advance(false);
    try {
      m = pipe.resume(from, optional_string(body, "edit"), optional_string(body, "task_description"));
    } catch (const pipeline::EditError& e) {
      throw api_error("invalid-edit", e.what());
    } catch (const pipeline::StateError& e) {
      throw api_error("step-not-reached", e.what());
    } catch (const std::invalid_argument& e) {
      throw api_error("invalid-request", e.what());
    }
  }
  if (m.status == RunStatus::Running) launch(s);
  return m;
}

}  // namespace nl2plan::service
