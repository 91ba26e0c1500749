#include "nl2plan/pipeline/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nl2plan::pipeline {

namespace {

constexpr std::string_view kStepNames[] = {"type_extraction",    "type_hierarchy",
                                           "action_extraction",  "action_construction",
                                           "task_extraction",    "planning"};

void check_keys(const nlohmann::json& j, std::string_view where,
                const std::set<std::string>& known) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

FeedbackSource feedback_value(const nlohmann::json& j) {
  auto f = feedback_from_string(j.get<std::string>());
  if (!f) throw std::invalid_argument("feedback must be none, llm or human");
  return *f;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

nlohmann::json scalar(const std::string& text, int line) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    size_t used = 0;
    long v = std::stol(text, &used);
    if (used == text.size()) return v;
    double d = std::stod(text, &used);
    if (used == text.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("line " + std::to_string(line) + ": cannot read value '" +
                              text + "'");
}

}  // namespace

std::string_view to_string(StepId step) {
  return kStepNames[step_number(step) - 1];
}

std::optional<StepId> step_from_string(std::string_view text) {
  for (int i = 1; i <= kStepCount; ++i) {
    if (kStepNames[i - 1] == text || std::to_string(i) == text) return step_at(i);
  }
  return std::nullopt;
}

StepId step_at(int number) {
  if (number < 1 || number > kStepCount) {
    throw std::out_of_range("no step " + std::to_string(number));
  }
  return static_cast<StepId>(number);
}

std::string_view to_string(FeedbackSource source) {
  switch (source) {
    case FeedbackSource::None: return "none";
    case FeedbackSource::Llm: return "llm";
    case FeedbackSource::Human: return "human";
  }
  return "none";
}

std::optional<FeedbackSource> feedback_from_string(std::string_view text) {
  for (auto s : {FeedbackSource::None, FeedbackSource::Llm, FeedbackSource::Human}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

FeedbackSource RunConfig::feedback_for(StepId step) const {
  auto it = feedback.find(step);
  return it == feedback.end() ? FeedbackSource::None : it->second;
}

void RunConfig::set_feedback(FeedbackSource source) {
  feedback.clear();
  for (int i = 1; i < kStepCount; ++i) feedback[step_at(i)] = source;
}

std::optional<std::string> config_error(const RunConfig& config) {
  if (config.max_validator_messages < 0) return "max_validator_messages must be >= 0";
  if (config.max_task_validations < 1) return "max_task_validations must be >= 1";
  if (!(config.temperature >= 0.0 && config.temperature <= 2.0)) {
    return "temperature must be in [0, 2]";
  }
  if (config.provider.max_tokens && *config.provider.max_tokens <= 0) {
    return "max_tokens must be positive";
  }
  if (config.feedback_for(StepId::Planning) != FeedbackSource::None) {
    return "planning takes no feedback";
  }
  const auto& s = config.planner.search;
  if (s.max_expansions == 0 || s.max_states == 0 || s.time_limit.count() <= 0 ||
      config.planner.grounding.max_ground_actions == 0) {
    return "planner limits must be positive";
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  nlohmann::json feedback = nlohmann::json::object();
  for (int i = 1; i < kStepCount; ++i) {
    feedback[std::string(to_string(step_at(i)))] = to_string(c.feedback_for(step_at(i)));
  }
  const auto& p = c.provider;
  nlohmann::json provider = {{"kind", to_string(p.kind)},
                             {"endpoint", p.endpoint},
                             {"model", p.model},
                             {"api_key_env", p.api_key_env},
                             {"transcript_dir", p.transcript_dir.string()},
                             {"script_file", p.script_file.string()},
                             {"max_tokens", nullptr}};
  if (p.max_tokens) provider["max_tokens"] = *p.max_tokens;
  const auto& s = c.planner.search;
  nlohmann::json planner = {{"algorithm", planner::to_string(s.algorithm)},
                            {"heuristic", planner::to_string(s.heuristic)},
                            {"max_expansions", s.max_expansions},
                            {"max_states", s.max_states},
                            {"time_limit_ms", s.time_limit.count()},
                            {"max_ground_actions", c.planner.grounding.max_ground_actions}};
  j = {{"feedback", feedback},
       {"max_validator_messages", c.max_validator_messages},
       {"max_task_validations", c.max_task_validations},
       {"start_step", to_string(c.start_step)},
       {"temperature", c.temperature},
       {"provider", provider},
       {"planner", planner}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  try {
    check_keys(j, "config",
               {"feedback", "max_validator_messages", "max_task_validations", "start_step",
                "temperature", "provider", "planner"});
    if (j.contains("feedback")) {
      const auto& f = j.at("feedback");
      if (f.is_string()) {
        c.set_feedback(feedback_value(f));
      } else {
        check_keys(f, "feedback", {kStepNames, kStepNames + kStepCount});
        for (const auto& [step, v] : f.items()) c.feedback[*step_from_string(step)] = feedback_value(v);
      }
    }
    if (j.contains("max_validator_messages")) {
      j.at("max_validator_messages").get_to(c.max_validator_messages);
    }
    if (j.contains("max_task_validations")) {
      j.at("max_task_validations").get_to(c.max_task_validations);
    }
    if (j.contains("start_step")) {
      auto s = step_from_string(j.at("start_step").get<std::string>());
      if (!s) throw std::invalid_argument("unknown start_step");
      c.start_step = *s;
    }
    if (j.contains("temperature")) j.at("temperature").get_to(c.temperature);
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      check_keys(p, "provider", {"kind", "endpoint", "model", "api_key_env",
                                 "transcript_dir", "script_file", "max_tokens"});
      if (p.contains("kind")) {
        auto k = llm::provider_kind_from_string(p.at("kind").get<std::string>());
        if (!k) throw std::invalid_argument("provider kind must be live, replay or record");
        c.provider.kind = *k;
      }
      if (p.contains("endpoint")) p.at("endpoint").get_to(c.provider.endpoint);
      if (p.contains("model")) p.at("model").get_to(c.provider.model);
      if (p.contains("api_key_env")) p.at("api_key_env").get_to(c.provider.api_key_env);
      if (p.contains("transcript_dir")) {
        c.provider.transcript_dir = p.at("transcript_dir").get<std::string>();
      }
      if (p.contains("script_file")) {
        c.provider.script_file = p.at("script_file").get<std::string>();
      }
      if (p.contains("max_tokens")) {
        if (p.at("max_tokens").is_null()) c.provider.max_tokens.reset();
        else c.provider.max_tokens = p.at("max_tokens").get<int>();
      }
    }
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      check_keys(p, "planner", {"algorithm", "heuristic", "max_expansions", "max_states",
                                "time_limit_ms", "max_ground_actions"});
      auto& s = c.planner.search;
      if (p.contains("algorithm")) {
        auto a = planner::algorithm_from_string(p.at("algorithm").get<std::string>());
        if (!a) throw std::invalid_argument("unknown planner algorithm");
        s.algorithm = *a;
      }
      if (p.contains("heuristic")) {
        auto h = planner::heuristic_from_string(p.at("heuristic").get<std::string>());
        if (!h) throw std::invalid_argument("unknown planner heuristic");
        s.heuristic = *h;
      }
      if (p.contains("max_expansions")) p.at("max_expansions").get_to(s.max_expansions);
      if (p.contains("max_states")) p.at("max_states").get_to(s.max_states);
      if (p.contains("time_limit_ms")) {
        s.time_limit = std::chrono::milliseconds(p.at("time_limit_ms").get<long>());
      }
      if (p.contains("max_ground_actions")) {
        p.at("max_ground_actions").get_to(c.planner.grounding.max_ground_actions);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  if (auto err = config_error(c)) throw std::invalid_argument(*err);
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir,
                            RunConfig base) {
  nlohmann::json j = nlohmann::json::object();
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("line " + std::to_string(n) + ": unterminated section");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "provider" && section != "pipeline" && section != "planner") {
        throw std::invalid_argument("line " + std::to_string(n) + ": unknown section " + section);
      }
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(n) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.front() != '"') {
      size_t hash = value.find('#');
      if (hash != std::string::npos) value = trim(std::string_view(value).substr(0, hash));
    }
    nlohmann::json v = scalar(value, n);
    if (section.empty() || section == "pipeline") {
      j[key] = v;
    } else {
      j[section][key] = v;
    }
  }
  for (const char* key : {"transcript_dir", "script_file"}) {
    if (j.contains("provider") && j["provider"].contains(key)) {
      std::filesystem::path p = j["provider"][key].get<std::string>();
      if (p.is_relative()) j["provider"][key] = (base_dir / p).lexically_normal().string();
    }
  }
  from_json(j, base);
  return base;
}

RunConfig load_config_file(const std::filesystem::path& file, RunConfig base) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), {});
  try {
    return parse_config_text(text, file.parent_path(), std::move(base));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
}

}  // namespace nl2plan::pipeline
