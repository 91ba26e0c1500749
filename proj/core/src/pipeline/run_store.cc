#include "nl2plan/pipeline/run_store.h"

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace nl2plan::pipeline {

namespace fs = std::filesystem;

void atomic_write(const fs::path& file, std::string_view text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  static thread_local std::mt19937_64 rng(std::random_device{}());
  fs::path tmp = file;
  tmp += ".tmp" + std::to_string(rng() % 1000000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {}

bool RunStore::exists() const { return fs::is_regular_file(dir_ / "manifest.json"); }

std::string RunStore::step_file(StepId step) {
  return "step_" + std::to_string(step_number(step)) + ".json";
}

std::string RunStore::transcript_file(StepId step) {
  return "transcripts/step_" + std::to_string(step_number(step)) + ".jsonl";
}

std::vector<std::string> RunStore::outputs_of(StepId step) {
  switch (step) {
    case StepId::ActionConstruction: return {"domain.pddl"};
    case StepId::TaskExtraction: return {"problem.pddl"};
    case StepId::Planning: return {"plan.txt", "NO_PLAN"};
    default: return {};
  }
}

RunManifest RunStore::load_manifest() const {
  return nlohmann::json::parse(read_text(dir_ / "manifest.json")).get<RunManifest>();
}

void RunStore::save_manifest(RunManifest& manifest) const {
  manifest.files.clear();
  std::vector<std::string> names = {"manifest.json"};
  for (int i = 1; i <= kStepCount; ++i) {
    names.push_back(step_file(step_at(i)));
    names.push_back(transcript_file(step_at(i)));
  }
  for (const char* n : {"domain.pddl", "problem.pddl", "plan.txt", "NO_PLAN", "usage.json"}) {
    names.push_back(n);
  }
  for (const auto& n : names) {
    if (n == "manifest.json" || fs::exists(dir_ / n)) manifest.files.push_back(n);
  }
  atomic_write(dir_ / "manifest.json", nlohmann::json(manifest).dump(2) + "\n");
}

std::optional<StepRecord> RunStore::load_step(StepId step) const {
  fs::path p = dir_ / step_file(step);
  if (!fs::exists(p)) return std::nullopt;
  return nlohmann::json::parse(read_text(p)).get<StepRecord>();
}

void RunStore::save_step(const StepRecord& record,
                         const std::vector<llm::ChatExchange>& exchanges) const {
  std::string lines;
  for (const auto& e : exchanges) lines += llm::exchange_line(e);
  atomic_write(dir_ / transcript_file(record.step), lines);
  atomic_write(dir_ / step_file(record.step), nlohmann::json(record).dump(2) + "\n");
}

std::vector<llm::ChatExchange> RunStore::load_exchanges(StepId step) const {
  fs::path p = dir_ / transcript_file(step);
  if (!fs::exists(p)) return {};
  return llm::read_transcript(p);
}

std::vector<llm::ChatExchange> RunStore::all_exchanges() const {
  std::vector<llm::ChatExchange> out;
  for (int i = 1; i <= kStepCount; ++i) {
    auto part = load_exchanges(step_at(i));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void RunStore::write_file(std::string_view name, std::string_view text) const {
  atomic_write(dir_ / name, text);
}

std::optional<std::string> RunStore::read_file(std::string_view name) const {
  fs::path p = dir_ / name;
  if (!fs::exists(p)) return std::nullopt;
  return read_text(p);
}

void RunStore::remove_file(std::string_view name) const { fs::remove(dir_ / name); }

void RunStore::supersede(StepId from, int seq) const {
  fs::path target = dir_ / "superseded" / std::to_string(seq);
  auto move = [&](const std::string& name) {
    fs::path src = dir_ / name;
    if (!fs::exists(src)) return;
    fs::path dst = target / name;
    fs::create_directories(dst.parent_path());
    fs::rename(src, dst);
  };
  for (int i = step_number(from); i <= kStepCount; ++i) {
    StepId s = step_at(i);
    if (!fs::exists(dir_ / step_file(s))) continue;
    move(step_file(s));
    move(transcript_file(s));
    for (const auto& out : outputs_of(s)) move(out);
  }
}

llm::UsageReport RunStore::write_usage() const {
  llm::UsageReport report = llm::usage_totals(all_exchanges());
  atomic_write(dir_ / "usage.json", nlohmann::json(report).dump(2) + "\n");
  return report;
}

}  // namespace nl2plan::pipeline
