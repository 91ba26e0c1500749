// nl2plan command-line front end.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nl2plan/llm/provider.h"
#include "nl2plan/llm/transcript.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/pddl/printer.h"
#include "nl2plan/pipeline/baseline.h"
#include "nl2plan/pipeline/pipeline.h"
#include "nl2plan/planner/plan_check.h"
#include "nl2plan/planner/search.h"
#include "nl2plan/service/http_service.h"
#include "nl2plan/validate/validator.h"

namespace fs = std::filesystem;
using namespace nl2plan;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kError = 1, kRunFailed = 2, kAwaiting = 4 };

struct Common {
  std::string config_file;
  std::string provider;
  std::string transcripts;
  std::string script;
  std::string feedback;
  std::string model;
};

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string join_inputs(const std::vector<std::string>& files) {
  std::string out;
  for (size_t i = 0; i < files.size(); ++i) {
    if (i > 0) out += "\n";
    out += slurp(files[i]);
  }
  return out;
}

pipeline::RunConfig make_config(const Common& c) {
  pipeline::RunConfig config;
  if (!c.config_file.empty()) config = pipeline::load_config_file(c.config_file);
  if (!c.provider.empty()) {
    auto kind = llm::provider_kind_from_string(c.provider);
    if (!kind) throw std::invalid_argument("unknown provider " + c.provider);
    config.provider.kind = *kind;
  }
  if (!c.transcripts.empty()) config.provider.transcript_dir = fs::absolute(c.transcripts);
  if (!c.script.empty()) config.provider.script_file = fs::absolute(c.script);
  if (!c.model.empty()) config.provider.model = c.model;
  if (!c.feedback.empty()) {
    auto f = pipeline::feedback_from_string(c.feedback);
    if (!f) throw std::invalid_argument("--feedback must be none, llm or human");
    config.set_feedback(*f);
  }
  return config;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "Config file")->check(CLI::ExistingFile);
  app->add_option("--provider", c.provider, "live, record, replay or scripted");
  app->add_option("--transcripts", c.transcripts, "Transcript directory");
  app->add_option("--script", c.script, "Scripted responses (provider scripted)");
  app->add_option("--feedback", c.feedback, "none, llm or human");
  app->add_option("--model", c.model, "Model name");
}

void print_summary(const pipeline::RunManifest& m, const fs::path& dir) {
  std::cout << "run " << m.id << ": " << pipeline::to_string(m.status);
  if (m.current_step) std::cout << " at " << pipeline::to_string(*m.current_step);
  std::cout << "\n";
  if (!m.error.empty()) std::cout << "error: " << m.error << "\n";
  if (m.degraded) std::cout << "degraded: some artifacts were accepted with validation issues\n";
  if (m.outcome == "plan") std::cout << "plan: " << (dir / "plan.txt").string() << "\n";
  if (m.outcome == "unsolvable") std::cout << pipeline::kNoPlanFound << "\n";
}

int exit_code(const pipeline::RunManifest& m) {
  switch (m.status) {
    case pipeline::RunStatus::Done:
      return kOk;
    case pipeline::RunStatus::AwaitingHumanFeedback:
      return kAwaiting;
    default:
      return kRunFailed;
  }
}

// Terminates the process without unwinding once step `n` is on disk.
void install_halt(pipeline::Pipeline& pipe, int n) {
  if (n < 0) return;
  pipe.set_after_step([n](pipeline::StepId s) {
    if (pipeline::step_number(s) == n) std::_Exit(75);
  });
}

// Prompts for feedback on the step the run is parked at until the run
// finishes or input ends.
pipeline::RunManifest interact(pipeline::Pipeline& pipe, const pipeline::RunStore& store,
                               pipeline::RunManifest m) {
  while (m.status == pipeline::RunStatus::AwaitingHumanFeedback && m.current_step) {
    pipeline::StepId step = *m.current_step;
    auto rec = store.load_step(step);
    std::cerr << "\n== " << pipeline::to_string(step) << " ==\n"
              << (rec ? rec->artifact.dump(2) : "{}") << "\n"
              << "approve | feedback <text> | edit <file> > " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) break;
    pipeline::HumanInput input;
    if (line.empty() || line == "approve" || line == "a") {
      input.kind = pipeline::HumanInput::Kind::Approve;
    } else if (line.rfind("feedback ", 0) == 0) {
      input = {pipeline::HumanInput::Kind::Feedback, line.substr(9)};
    } else if (line.rfind("edit ", 0) == 0) {
      input = {pipeline::HumanInput::Kind::Edit, slurp(line.substr(5))};
    } else {
      std::cerr << "unrecognized answer\n";
      continue;
    }
    try {
      m = pipe.submit_feedback(step, input);
    } catch (const std::exception& e) {
      std::cerr << "rejected: " << e.what() << "\n";
    }
  }
  return m;
}

int cmd_run(const Common& c, const std::vector<std::string>& inputs, const std::string& task,
            const std::string& start, const std::string& domain, const std::string& problem,
            const std::string& out, int halt) {
  pipeline::RunInputs in;
  in.config = make_config(c);
  in.description = join_inputs(inputs);
  if (!task.empty()) in.task_description = slurp(task);
  if (!start.empty()) {
    auto s = pipeline::step_from_string(start);
    if (!s) throw std::invalid_argument("unknown step " + start);
    in.config.start_step = *s;
  }
  if (!domain.empty()) in.domain_text = slurp(domain);
  if (!problem.empty()) in.problem_text = slurp(problem);
  if (auto problem_text = llm::config_problem(in.config.provider)) {
    throw std::invalid_argument(*problem_text);
  }
  pipeline::create_run(out, in);
  if (halt == 0) std::_Exit(75);
  pipeline::RunStore store(out);
  auto provider = llm::make_provider(in.config.provider);
  pipeline::Pipeline pipe(store, *provider);
  install_halt(pipe, halt);
  pipeline::RunManifest m = interact(pipe, store, pipe.advance());
  print_summary(m, out);
  return exit_code(m);
}

int cmd_resume(const Common& c, const std::string& dir, const std::string& step,
               const std::string& edit, const std::string& task, int halt) {
  pipeline::RunStore store(dir);
  pipeline::RunManifest m = store.load_manifest();
  pipeline::RunConfig config = m.config;
  if (!c.provider.empty() || !c.transcripts.empty() || !c.script.empty() || !c.config_file.empty()) {
    config.provider = make_config(c).provider;
  }
  if (!c.feedback.empty()) {
    // The feedback source is part of the run; keep the stored one.
    std::cerr << "note: --feedback is ignored on resume\n";
  }
  auto provider = llm::make_provider(config.provider);
  pipeline::Pipeline pipe(store, *provider);
  install_halt(pipe, halt);
  std::optional<pipeline::StepId> from;
  if (!step.empty()) {
    from = pipeline::step_from_string(step);
    if (!from) throw std::invalid_argument("unknown step " + step);
  }
  std::optional<std::string> edit_text;
  if (!edit.empty()) edit_text = slurp(edit);
  std::optional<std::string> task_text;
  if (!task.empty()) task_text = slurp(task);
  m = interact(pipe, store, pipe.resume(from, edit_text, task_text));
  print_summary(m, dir);
  return exit_code(m);
}

std::pair<pddl::DomainSpec, pddl::ProblemSpec> load_pair(const std::string& d, const std::string& p) {
  pddl::DomainSpec domain = pddl::parse_domain(slurp(d));
  pddl::ProblemSpec problem = pddl::parse_problem(slurp(p), domain);
  return {domain, problem};
}

int cmd_validate(const std::string& domain_file, const std::string& problem_file) {
  pddl::DomainSpec domain = pddl::parse_domain(slurp(domain_file));
  bool ok = true;
  for (const auto& a : domain.actions) {
    pddl::DomainSpec context = domain;
    context.actions.clear();
    pddl::ActionDraft draft{a, {}, {}};
    auto report = validate::validate_action(draft, context);
    std::cout << "action " << a.name << ": " << validate::to_string(report.category) << "\n";
    if (!report.passed()) {
      ok = false;
      std::cout << validate::render_feedback(report) << "\n";
    }
  }
  pddl::ProblemSpec problem = pddl::parse_problem(slurp(problem_file), domain, pddl::ParseMode::Lenient);
  pddl::TaskDraft task{problem.objects, {}, problem.initial_cost, problem.goal};
  for (const auto& atom : problem.init) task.init.push_back(pddl::Formula::make_atom(atom));
  auto report = validate::validate_task(task, domain);
  std::cout << "task: " << validate::to_string(report.category) << "\n";
  if (!report.passed()) {
    ok = false;
    std::cout << validate::render_feedback(report) << "\n";
  }
  return ok ? kOk : kError;
}

int cmd_plan(const std::string& d, const std::string& p, const std::string& algorithm,
             const std::string& heuristic, long time_limit_ms, const std::string& out) {
  auto [domain, problem] = load_pair(d, p);
  planner::PlannerOptions options;
  if (!algorithm.empty()) {
    auto a = planner::algorithm_from_string(algorithm);
    if (!a) throw std::invalid_argument("unknown algorithm " + algorithm);
    options.search.algorithm = *a;
  }
  if (!heuristic.empty()) {
    auto h = planner::heuristic_from_string(heuristic);
    if (!h) throw std::invalid_argument("unknown heuristic " + heuristic);
    options.search.heuristic = *h;
  }
  if (time_limit_ms > 0) options.search.time_limit = std::chrono::milliseconds(time_limit_ms);
  planner::PlanResult r = planner::solve(domain, problem, options);
  std::cerr << "expanded " << r.stats.expanded << ", generated " << r.stats.generated << ", "
            << r.stats.seconds << " s\n";
  switch (r.outcome) {
    case planner::Outcome::Solved: {
      auto check = planner::validate_plan(domain, problem, *r.plan);
      if (!check.valid) throw std::runtime_error("planner produced an invalid plan: " + check.error);
      std::string text = pddl::print_plan(*r.plan);
      if (!out.empty()) {
        std::ofstream(out, std::ios::binary) << text;
      }
      std::cout << text;
      return kOk;
    }
    case planner::Outcome::Unsolvable:
      std::cout << pipeline::kNoPlanFound << "\n";
      return kOk;
    case planner::Outcome::ResourceLimit:
      std::cout << "planner stopped at a resource limit: " << r.detail << "\n";
      return kRunFailed;
  }
  return kError;
}

int cmd_baseline(const Common& c, const std::vector<std::string>& inputs, const std::string& task) {
  pipeline::RunConfig config = make_config(c);
  auto provider = llm::make_provider(config.provider);
  std::cout << pipeline::baseline_cot(*provider, pipeline::Pipeline::default_templates(),
                                      join_inputs(inputs), task.empty() ? "" : slurp(task), config)
            << "\n";
  return kOk;
}

int cmd_report_usage(const std::vector<std::string>& paths) {
  std::vector<llm::ChatExchange> all;
  for (const auto& p : paths) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      fs::path dir = fs::exists(fs::path(p) / "transcripts") ? fs::path(p) / "transcripts" : fs::path(p);
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) {
      auto ex = llm::read_transcript(f);
      all.insert(all.end(), ex.begin(), ex.end());
    }
  }
  std::cout << json(llm::usage_totals(all)).dump(2) << "\n";
  return kOk;
}

service::HttpService* g_service = nullptr;

int cmd_serve(const Common& c, const std::string& root, int port, size_t keep, const std::string& ui) {
  service::ServiceOptions options;
  options.root = root;
  options.base_config = make_config(c);
  options.keep = keep;
  service::RunManager runs(options);
  std::optional<fs::path> ui_dir;
  if (!ui.empty()) ui_dir = fs::path(ui);
  service::HttpService http(runs, ui_dir);
  int bound = http.bind("0.0.0.0", port);
  if (bound < 0) throw std::runtime_error("cannot bind port " + std::to_string(port));
  std::cerr << "listening on port " << bound << ", runs in " << root << "\n";
  g_service = &http;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  http.listen();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turn natural-language descriptions into PDDL and plan"};
  app.require_subcommand(1);
  Common common;

  std::vector<std::string> inputs;
  std::string task, start, domain_file, problem_file, out, step, edit;
  int halt = -1;
  auto* run = app.add_subcommand("run", "Run the pipeline on a description");
  add_common(run, common);
  run->add_option("--input", inputs, "Description file(s), concatenated")->required()->check(CLI::ExistingFile);
  run->add_option("--task", task, "Separate task description used from task extraction on")
      ->check(CLI::ExistingFile);
  run->add_option("--start-step", start, "First step to run (name or number)");
  run->add_option("--domain", domain_file, "Domain to reuse")->check(CLI::ExistingFile);
  run->add_option("--problem", problem_file, "Problem, when starting at planning")->check(CLI::ExistingFile);
  run->add_option("--out", out, "Run directory to create")->required();
  run->add_option("--halt-after-step", halt, "Exit abruptly once step N is persisted (0: after setup)");

  std::string run_dir;
  auto* resume = app.add_subcommand("resume", "Continue or re-execute a run");
  add_common(resume, common);
  resume->add_option("run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  resume->add_option("--step", step, "Re-execute from this step");
  resume->add_option("--edit", edit, "Replacement artifact for --step")->check(CLI::ExistingFile);
  resume->add_option("--task", task, "New task description")->check(CLI::ExistingFile);
  resume->add_option("--halt-after-step", halt, "Exit abruptly once step N is persisted");

  std::string pddl_domain, pddl_problem;
  auto* validate = app.add_subcommand("validate", "Check a domain and problem");
  validate->add_option("domain", pddl_domain)->required()->check(CLI::ExistingFile);
  validate->add_option("problem", pddl_problem)->required()->check(CLI::ExistingFile);

  std::string algorithm, heuristic;
  long time_limit = 0;
  auto* plan = app.add_subcommand("plan", "Solve a problem");
  plan->add_option("domain", pddl_domain)->required()->check(CLI::ExistingFile);
  plan->add_option("problem", pddl_problem)->required()->check(CLI::ExistingFile);
  plan->add_option("--algorithm", algorithm, "gbfs, astar, ucs or bfs");
  plan->add_option("--heuristic", heuristic, "ff, add, max or blind");
  plan->add_option("--time-limit-ms", time_limit);
  plan->add_option("--out", out, "Also write the plan to this file");

  auto* baseline = app.add_subcommand("baseline-cot", "Ask for a plan directly");
  add_common(baseline, common);
  baseline->add_option("--input", inputs, "Domain description file(s)")->required()->check(CLI::ExistingFile);
  baseline->add_option("--task", task, "Task description")->required()->check(CLI::ExistingFile);

  int port = 8080;
  size_t keep = 0;
  std::string ui;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_common(serve, common);
  serve->add_option("--port", port, "Port (0 picks one)");
  serve->add_option("--out", out, "Directory holding the runs")->required();
  serve->add_option("--keep", keep, "Keep at most N runs (0: all)");
  serve->add_option("--ui", ui, "Review UI bundle to serve at /")->check(CLI::ExistingDirectory);

  std::vector<std::string> usage_paths;
  auto* report = app.add_subcommand("report-usage", "Sum token usage of transcripts or runs");
  report->add_option("paths", usage_paths)->required()->check(CLI::ExistingPath);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(common, inputs, task, start, domain_file, problem_file, out, halt);
    if (*resume) return cmd_resume(common, run_dir, step, edit, task, halt);
    if (*validate) return cmd_validate(pddl_domain, pddl_problem);
    if (*plan) return cmd_plan(pddl_domain, pddl_problem, algorithm, heuristic, time_limit, out);
    if (*baseline) return cmd_baseline(common, inputs, task);
    if (*serve) return cmd_serve(common, out, port, keep, ui);
    if (*report) return cmd_report_usage(usage_paths);
  } catch (const std::exception& e) {
    std::cerr << "nl2plan: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
