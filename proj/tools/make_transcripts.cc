// Regenerates the replay transcripts under data/transcripts from the scripted
// responses under data/scripts. With --check, compares instead of writing.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nl2plan/llm/provider.h"
#include "nl2plan/llm/transcript.h"
#include "nl2plan/pipeline/baseline.h"
#include "nl2plan/pipeline/pipeline.h"

namespace fs = std::filesystem;
using namespace nl2plan;

namespace {

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string lines(const std::vector<llm::ChatExchange>& exchanges) {
  std::string out;
  for (const auto& e : exchanges) out += llm::exchange_line(e);
  return out;
}

// Wraps a provider and keeps every exchange in memory.
class Capture : public llm::Provider {
 public:
  explicit Capture(llm::Provider& inner) : inner_(inner) {}
  llm::ChatExchange complete(const llm::ChatRequest& request) override {
    exchanges.push_back(inner_.complete(request));
    return exchanges.back();
  }
  std::vector<llm::ChatExchange> exchanges;

 private:
  llm::Provider& inner_;
};

void check_consumed(const llm::ScriptedProvider& p, const std::string& scenario) {
  for (const auto& [id, left] : p.remaining()) {
    if (left > 0) throw std::runtime_error(scenario + ": " + std::to_string(left) + " unused responses for " + id);
  }
}

pipeline::RunConfig llm_feedback_config() {
  pipeline::RunConfig config;
  config.set_feedback(pipeline::FeedbackSource::Llm);
  return config;
}

std::map<std::string, std::string> generate(const fs::path& data, const fs::path& scratch) {
  std::map<std::string, std::string> out;
  const std::string domain_desc = slurp(data / "descriptions/blocksworld_domain.txt");
  const std::string easy = slurp(data / "descriptions/blocksworld_easy.txt");
  const std::string medium = slurp(data / "descriptions/blocksworld_medium.txt");

  auto script = llm::ScriptedProvider::from_file(data / "scripts/blocksworld.script");
  Capture full(*script);
  pipeline::RunInputs in;
  in.id = "blocksworld";
  in.description = domain_desc + "\n" + easy;
  in.config = llm_feedback_config();
  auto m = pipeline::run_pipeline(scratch / "blocksworld", in, full);
  if (m.status != pipeline::RunStatus::Done) throw std::runtime_error("blocksworld run: " + m.error);
  check_consumed(*script, "blocksworld");
  out["blocksworld"] = lines(full.exchanges);

  auto reuse_script = llm::ScriptedProvider::from_file(data / "scripts/blocksworld_reuse.script");
  Capture reuse(*reuse_script);
  pipeline::RunInputs rin;
  rin.id = "blocksworld_reuse";
  rin.description = medium;
  rin.config = llm_feedback_config();
  rin.config.start_step = pipeline::StepId::TaskExtraction;
  rin.domain_text = slurp(scratch / "blocksworld" / "domain.pddl");
  m = pipeline::run_pipeline(scratch / "blocksworld_reuse", rin, reuse);
  if (m.status != pipeline::RunStatus::Done) throw std::runtime_error("reuse run: " + m.error);
  check_consumed(*reuse_script, "blocksworld_reuse");
  out["blocksworld_reuse"] = lines(reuse.exchanges);

  auto base_script = llm::ScriptedProvider::from_file(data / "scripts/baseline.script");
  Capture base(*base_script);
  pipeline::baseline_cot(base, pipeline::Pipeline::default_templates(), domain_desc, easy,
                         pipeline::RunConfig{});
  check_consumed(*base_script, "baseline");
  out["baseline"] = lines(base.exchanges);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate replay transcripts"};
  std::string data, out_dir;
  bool check = false;
  app.add_option("--data", data, "data directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("--out", out_dir, "transcripts directory (default: <data>/transcripts)");
  app.add_flag("--check", check, "fail if the stored transcripts differ");
  CLI11_PARSE(app, argc, argv);
  fs::path target = out_dir.empty() ? fs::path(data) / "transcripts" : fs::path(out_dir);
  fs::path scratch = fs::temp_directory_path() /
                     ("nl2plan-transcripts-" + pipeline::new_run_id());
  int status = 0;
  try {
    for (const auto& [name, text] : generate(data, scratch)) {
      fs::path file = target / name / "transcript.jsonl";
      if (check) {
        if (!fs::exists(file) || slurp(file) != text) {
          std::cerr << file.string() << " is out of date\n";
          status = 1;
        }
      } else {
        fs::create_directories(file.parent_path());
        std::ofstream(file, std::ios::binary) << text;
        std::cout << "wrote " << file.string() << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "make_transcripts: " << e.what() << "\n";
    status = 1;
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);
  return status;
}
