#include "nl2plan/pipeline/pipeline.h"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nl2plan/pddl/parser.h"
#include "nl2plan/pddl/printer.h"
#include "nl2plan/pddl/sexpr.h"
#include "nl2plan/planner/plan_check.h"
#include "nl2plan/planner/search.h"
#include "nl2plan/validate/validator.h"

namespace nl2plan::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

struct StepState {
  StepRecord record;
  std::vector<llm::ChatExchange> exchanges;
};

namespace {

constexpr const char* kDomainName = "nl2plan-domain";
constexpr const char* kProblemName = "task";

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

// Issues LLM requests for one step and records them.
class Caller {
 public:
  Caller(llm::Provider& provider, const RunConfig& config, StepState& st)
      : provider_(provider), config_(config), st_(st) {}

  std::string call(const std::string& label, std::vector<llm::ChatMessage> messages,
                   const std::string& purpose, const std::string& action = {}, int pass = 0) {
    llm::ChatRequest r;
    r.template_id = label;
    r.step = std::string(to_string(st_.record.step));
    r.messages = std::move(messages);
    r.model = config_.provider.model;
    r.temperature = config_.temperature;
    r.max_tokens = config_.provider.max_tokens;
    llm::ChatExchange e = provider_.complete(r);
    st_.exchanges.push_back(e);
    st_.record.calls.push_back({purpose, label, action, pass, r.messages.back().content,
                                e.response, e.digest, e.usage});
    return e.response;
  }

  template <typename T>
  struct Parsed {
    std::string response;
    std::string block;
    T value;
  };

  // Parses the tagged block; one retry with a format reminder, then the
  // step fails.
  template <typename F>
  auto ask(const std::string& label, const std::string& prompt, std::string_view tag,
           F&& parse, const std::string& purpose, const std::string& action = {},
           int pass = 0) -> Parsed<decltype(parse(std::string()))> {
    std::string response = call(label, {{"user", prompt}}, purpose, action, pass);
    std::string problem;
    try {
      std::string block = extract_block(response, tag);
      return {response, block, parse(block)};
    } catch (const StepOutputError& e) {
      problem = e.what();
    } catch (const pddl::ParseError& e) {
      problem = e.what();
    } catch (const std::invalid_argument& e) {
      problem = e.what();
    }
    std::string retry = call(label + ".retry",
                             {{"user", prompt},
                              {"assistant", response},
                              {"user", llm::format_reminder(tag) + "\nProblem: " + problem}},
                             "format-retry", action, pass);
    try {
      std::string block = extract_block(retry, tag);
      return {retry, block, parse(block)};
    } catch (const std::exception& e) {
      throw StepFailure(st_.record.step,
                        "output could not be parsed after one retry: " + std::string(e.what()));
    }
  }

 private:
  llm::Provider& provider_;
  const RunConfig& config_;
  StepState& st_;
};

struct Ctx {
  const RunStore& store;
  const RunManifest& manifest;
  const llm::TemplateLibrary& templates;
  Caller& caller;
  StepState& st;

  std::string render(const std::string& id, const llm::Bindings& b) const {
    return llm::render_template(templates.get(id), b);
  }
  std::string description() const { return manifest.description_for(st.record.step); }
  FeedbackSource feedback() const { return manifest.config.feedback_for(st.record.step); }
  std::string revision(const std::string& prompt, const std::string& solution,
                       const std::string& feedback) const {
    return render("revision", {{"prompt", prompt}, {"solution", solution}, {"feedback", feedback}});
  }
};

json require_artifact(const RunStore& store, StepId step) {
  auto rec = store.load_step(step);
  if (!rec || rec->status != StepStatus::Done) {
    throw StepFailure(step, "step has not completed");
  }
  return rec->artifact;
}

TypeList load_types(const RunStore& store) {
  return require_artifact(store, StepId::TypeExtraction).at("types").get<TypeList>();
}

TypeTree load_tree(const RunStore& store) {
  return tree_from_json(require_artifact(store, StepId::TypeHierarchy).at("types"));
}

std::vector<NlAction> load_nl_actions(const RunStore& store) {
  return require_artifact(store, StepId::ActionExtraction).at("actions").get<std::vector<NlAction>>();
}

pddl::DomainSpec load_domain(const RunStore& store, std::vector<std::string>* warnings) {
  auto text = store.read_file("domain.pddl");
  if (!text) throw StepFailure(StepId::TaskExtraction, "no domain.pddl in the run");
  try {
    return pddl::parse_domain(*text);
  } catch (const pddl::ParseError& e) {
    if (warnings) warnings->push_back(std::string("domain is not strictly valid: ") + e.what());
    return pddl::parse_domain(*text, pddl::ParseMode::Lenient);
  }
}

// Steps 1 to 3 share one shape: a main prompt, a parsed block, and an
// optional feedback round.
struct SimpleStep {
  std::string id;
  std::string tag;
  llm::Bindings main;
  llm::Bindings feedback;
  std::function<json(const std::string&, std::vector<std::string>&)> parse;
};

SimpleStep simple_step(const Ctx& c) {
  SimpleStep s;
  s.id = std::string(to_string(c.st.record.step));
  s.main = {{"description", c.description()}};
  switch (c.st.record.step) {
    case StepId::TypeExtraction:
      s.tag = "types";
      s.feedback = s.main;
      s.parse = [](const std::string& block, std::vector<std::string>& w) {
        return json{{"types", parse_types(block, &w)}};
      };
      break;
    case StepId::TypeHierarchy: {
      s.tag = "hierarchy";
      TypeList types = load_types(c.store);
      std::string names;
      for (const auto& t : types) names += (names.empty() ? "" : ", ") + t.name;
      s.main["types"] = names;
      s.feedback = s.main;
      s.parse = [types](const std::string& block, std::vector<std::string>& w) {
        return json{{"types", tree_to_json(parse_hierarchy(block, types, &w))}};
      };
      break;
    }
    case StepId::ActionExtraction:
      s.tag = "actions";
      s.main["hierarchy"] = chomp(render_tree(load_tree(c.store).hierarchy));
      s.feedback = s.main;
      s.parse = [](const std::string& block, std::vector<std::string>& w) {
        return json{{"actions", parse_actions(block, &w)}};
      };
      break;
    default:
      throw std::logic_error("not a simple step");
  }
  return s;
}

void revise_simple(Ctx& c, const SimpleStep& s, const std::string& feedback) {
  StepRecord& r = c.st.record;
  auto p = c.caller.ask(s.id + ".revision", c.revision(r.prompt, r.response, feedback), s.tag,
                        [&](const std::string& b) { return s.parse(b, r.warnings); },
                        "feedback-revision");
  r.original_artifact = r.artifact;
  r.artifact = p.value;
  r.response = p.response;
}

void run_simple(Ctx& c) {
  SimpleStep s = simple_step(c);
  StepRecord& r = c.st.record;
  r.prompt = c.render(s.id, s.main);
  auto p = c.caller.ask(s.id, r.prompt, s.tag,
                        [&](const std::string& b) { return s.parse(b, r.warnings); }, "main");
  r.response = p.response;
  r.artifact = p.value;
  switch (c.feedback()) {
    case FeedbackSource::None:
      return;
    case FeedbackSource::Human:
      r.feedback = FeedbackRound{FeedbackSource::Human, "pending", ""};
      r.status = StepStatus::AwaitingFeedback;
      return;
    case FeedbackSource::Llm: {
      llm::Bindings b = s.feedback;
      b["solution"] = fenced(s.tag, p.block);
      std::string reply =
          c.caller.call(s.id + ".feedback", {{"user", c.render(s.id + ".feedback", b)}}, "feedback");
      auto text = parse_feedback(reply);
      if (!text) {
        r.feedback = FeedbackRound{FeedbackSource::Llm, "no-feedback", ""};
        return;
      }
      revise_simple(c, s, *text);
      r.feedback = FeedbackRound{FeedbackSource::Llm, "revised", *text};
      return;
    }
  }
}

// ---- action construction ----

std::string predicate_lines(const std::vector<pddl::PredicateDecl>& preds) {
  if (preds.empty()) return "none";
  std::string out;
  for (const auto& p : preds) {
    if (!out.empty()) out += "\n";
    out += pddl::print_predicate(p);
    if (!p.description.empty()) out += " ; " + pddl::single_line(p.description);
  }
  return out;
}

struct ActionWork {
  Ctx& c;
  TypeTree tree;
  std::vector<NlAction> nl;
  std::vector<pddl::PredicateDecl> pool;
  std::vector<std::optional<pddl::ActionDraft>> accepted;

  std::string hierarchy_text() const { return chomp(render_tree(tree.hierarchy)); }

  pddl::DomainSpec context_for(size_t skip) const {
    pddl::DomainSpec d;
    d.name = kDomainName;
    d.hierarchy = tree.hierarchy;
    d.predicates = pool;
    for (size_t i = 0; i < accepted.size(); ++i) {
      if (i != skip && accepted[i]) d.actions.push_back(accepted[i]->action);
    }
    return d;
  }

  std::string others(size_t skip) const {
    std::string out;
    for (size_t i = 0; i < nl.size(); ++i) {
      if (i == skip) continue;
      if (!out.empty()) out += "\n";
      out += "- " + nl[i].name + ": " + nl[i].description;
    }
    return out.empty() ? "none" : out;
  }

  auto parser(const std::string& name) {
    return [name](const std::string& block) { return pddl::parse_action_draft(block, name); };
  }

  // Validates until clean or the pass's message budget is spent.
  void validate_loop(ActionPass& ap, pddl::ActionDraft& draft, size_t i,
                     const std::string& prompt) {
    const int budget = c.manifest.config.max_validator_messages;
    pddl::DomainSpec ctx = context_for(i);
    while (true) {
      validate::ValidationReport report = validate::validate_action(draft, ctx);
      ap.reports.push_back(report);
      if (report.passed()) {
        ap.accepted_flawed = false;
        return;
      }
      if (ap.validator_messages >= budget) {
        ap.accepted_flawed = true;
        return;
      }
      auto p = c.caller.ask("action_construction.revision",
                            c.revision(prompt, ap.response, validate::render_feedback(report)),
                            "action", parser(nl[i].name), "validator-revision", nl[i].name, ap.pass);
      ++ap.validator_messages;
      ++ap.drafts;
      ap.response = p.response;
      draft = p.value;
    }
  }

  void accept(size_t i, pddl::ActionDraft draft, ActionPass& ap) {
    draft.action.name = nl[i].name;
    draft.action.description = nl[i].description;
    for (const auto& p : draft.new_predicates) {
      bool known = std::any_of(pool.begin(), pool.end(),
                               [&](const pddl::PredicateDecl& q) { return q.name == p.name; });
      if (!known) pool.push_back(p);
    }
    ap.block = pddl::print_action_block(draft);
    accepted[i] = std::move(draft);
  }

  void feedback_revision(size_t i, ActionPass& ap, const std::string& text,
                         pddl::ActionDraft& draft) {
    auto p = c.caller.ask("action_construction.revision", c.revision(ap.prompt, ap.response, text),
                          "action", parser(nl[i].name), "feedback-revision", nl[i].name, ap.pass);
    ++ap.drafts;
    ap.response = p.response;
    draft = p.value;
    validate_loop(ap, draft, i, ap.prompt);
  }

  void construct(size_t i, int pass, ActionRecord& rec) {
    ActionPass ap;
    ap.pass = pass;
    ap.prompt = c.render("action_construction",
                         {{"description", c.description()},
                          {"hierarchy", hierarchy_text()},
                          {"predicates", predicate_lines(pool)},
                          {"other_actions", others(i)},
                          {"action_name", nl[i].name},
                          {"action_description", nl[i].description},
                          {"action_example", nl[i].example}});
    auto p = c.caller.ask("action_construction", ap.prompt, "action", parser(nl[i].name), "main",
                          nl[i].name, pass);
    ap.drafts = 1;
    ap.response = p.response;
    pddl::ActionDraft draft = p.value;
    validate_loop(ap, draft, i, ap.prompt);
    if (pass == 2 && c.feedback() == FeedbackSource::Llm) {
      std::string reply = c.caller.call(
          "action_construction.feedback",
          {{"user", c.render("action_construction.feedback",
                             {{"description", c.description()},
                              {"hierarchy", hierarchy_text()},
                              {"predicates", predicate_lines(pool)},
                              {"action_name", nl[i].name},
                              {"action_description", nl[i].description},
                              {"solution", fenced("action", pddl::print_action_block(draft))}})}},
          "feedback", nl[i].name, pass);
      auto text = parse_feedback(reply);
      if (text) {
        feedback_revision(i, ap, *text, draft);
        rec.feedback = FeedbackRound{FeedbackSource::Llm, "revised", *text};
      } else {
        rec.feedback = FeedbackRound{FeedbackSource::Llm, "no-feedback", ""};
      }
    }
    accept(i, std::move(draft), ap);
    rec.passes.push_back(std::move(ap));
  }

  void assemble() {
    StepRecord& r = c.st.record;
    pddl::DomainSpec d;
    d.name = kDomainName;
    d.hierarchy = tree.hierarchy;
    d.predicates = pool;
    std::vector<std::string> flawed;
    for (size_t i = 0; i < nl.size(); ++i) {
      d.actions.push_back(accepted[i]->action);
      if (r.actions[i].passes.back().accepted_flawed) flawed.push_back(nl[i].name);
    }
    std::string unpruned = pddl::print_domain(d);
    PruneResult pr = prune_domain(d);
    r.artifact = {{"domain", pddl::print_domain(d)},
                  {"unpruned_domain", unpruned},
                  {"pruned_predicates", pr.predicates},
                  {"pruned_types", pr.types},
                  {"flawed_actions", flawed}};
    r.degraded = !flawed.empty();
    for (const auto& name : flawed) r.warnings.push_back("action " + name + " accepted with validation issues");
  }
};

ActionWork action_work(Ctx& c) {
  ActionWork w{c, load_tree(c.store), load_nl_actions(c.store), {}, {}};
  w.accepted.resize(w.nl.size());
  return w;
}

void run_action_construction(Ctx& c) {
  ActionWork w = action_work(c);
  StepRecord& r = c.st.record;
  r.actions.clear();
  for (const auto& a : w.nl) r.actions.push_back({a.name, {}, std::nullopt});
  for (int pass = 1; pass <= 2; ++pass) {
    for (size_t i = 0; i < w.nl.size(); ++i) w.construct(i, pass, r.actions[i]);
  }
  w.assemble();
  if (c.feedback() == FeedbackSource::Human) {
    r.feedback = FeedbackRound{FeedbackSource::Human, "pending", ""};
    r.status = StepStatus::AwaitingFeedback;
  }
}

// Human feedback on the whole action set: one regeneration per action.
void revise_actions(Ctx& c, const std::string& text) {
  ActionWork w = action_work(c);
  StepRecord& r = c.st.record;
  pddl::DomainSpec full =
      pddl::parse_domain(r.artifact.at("unpruned_domain").get<std::string>(), pddl::ParseMode::Lenient);
  w.pool = full.predicates;
  for (size_t i = 0; i < w.nl.size(); ++i) {
    w.accepted[i] = pddl::parse_action_draft(r.actions[i].passes.back().block, w.nl[i].name);
  }
  r.original_artifact = r.artifact;
  for (size_t i = 0; i < w.nl.size(); ++i) {
    ActionPass& ap = r.actions[i].passes.back();
    pddl::ActionDraft draft = *w.accepted[i];
    w.feedback_revision(i, ap, text, draft);
    w.accept(i, std::move(draft), ap);
  }
  r.warnings.erase(std::remove_if(r.warnings.begin(), r.warnings.end(),
                                  [](const std::string& s) { return s.rfind("action ", 0) == 0; }),
                   r.warnings.end());
  w.assemble();
}

// ---- task extraction ----

struct TaskWork {
  Ctx& c;
  pddl::DomainSpec domain;
  std::string domain_text;

  // Validates and redrafts until clean or the run-wide budget is spent.
  bool validate_loop(pddl::TaskDraft& draft) {
    StepRecord& r = c.st.record;
    const int budget = c.manifest.config.max_task_validations;
    while (static_cast<int>(r.validations.size()) < budget) {
      validate::ValidationReport report = validate::validate_task(draft, domain);
      r.validations.push_back(report);
      if (report.passed()) return true;
      if (static_cast<int>(r.validations.size()) >= budget) return false;
      auto p = c.caller.ask("task_extraction.revision",
                            c.revision(r.prompt, r.response, validate::render_feedback(report)),
                            "task", pddl::parse_task_draft, "validator-revision");
      r.response = p.response;
      draft = p.value;
    }
    return false;
  }

  void finish(const pddl::TaskDraft& draft, bool clean) {
    StepRecord& r = c.st.record;
    pddl::ProblemSpec problem = to_problem(draft, domain, &r.warnings);
    r.degraded = !clean;
    if (!clean) r.warnings.push_back("task accepted with validation issues");
    r.artifact = {{"problem", pddl::print_problem(problem)},
                  {"task", pddl::print_task_block(draft)},
                  {"validations", r.validations.size()},
                  {"passed", clean}};
  }

  void revise(const std::string& text) {
    StepRecord& r = c.st.record;
    auto p = c.caller.ask("task_extraction.revision", c.revision(r.prompt, r.response, text), "task",
                          pddl::parse_task_draft, "feedback-revision");
    r.response = p.response;
    r.original_artifact = r.artifact;
    pddl::TaskDraft draft = p.value;
    r.warnings.erase(std::remove(r.warnings.begin(), r.warnings.end(),
                                 std::string("task accepted with validation issues")),
                     r.warnings.end());
    finish(draft, validate_loop(draft));
  }
};

TaskWork task_work(Ctx& c) {
  TaskWork w{c, load_domain(c.store, &c.st.record.warnings), ""};
  w.domain_text = chomp(*c.store.read_file("domain.pddl"));
  return w;
}

void run_task_extraction(Ctx& c) {
  TaskWork w = task_work(c);
  StepRecord& r = c.st.record;
  r.prompt = c.render("task_extraction", {{"description", c.description()}, {"domain", w.domain_text}});
  auto p = c.caller.ask("task_extraction", r.prompt, "task", pddl::parse_task_draft, "main");
  r.response = p.response;
  pddl::TaskDraft draft = p.value;
  bool clean = w.validate_loop(draft);
  w.finish(draft, clean);
  switch (c.feedback()) {
    case FeedbackSource::None:
      return;
    case FeedbackSource::Human:
      r.feedback = FeedbackRound{FeedbackSource::Human, "pending", ""};
      r.status = StepStatus::AwaitingFeedback;
      return;
    case FeedbackSource::Llm: {
      std::string reply = c.caller.call(
          "task_extraction.feedback",
          {{"user", c.render("task_extraction.feedback",
                             {{"description", c.description()},
                              {"domain", w.domain_text},
                              {"solution", fenced("task", pddl::print_task_block(draft))}})}},
          "feedback");
      auto text = parse_feedback(reply);
      if (!text) {
        r.feedback = FeedbackRound{FeedbackSource::Llm, "no-feedback", ""};
        return;
      }
      w.revise(*text);
      r.feedback = FeedbackRound{FeedbackSource::Llm, "revised", *text};
      return;
    }
  }
}

// ---- planning ----

void run_planning(Ctx& c) {
  StepRecord& r = c.st.record;
  const StepId step = StepId::Planning;
  auto domain_text = c.store.read_file("domain.pddl");
  auto problem_text = c.store.read_file("problem.pddl");
  if (!domain_text || !problem_text) throw StepFailure(step, "domain.pddl or problem.pddl is missing");
  pddl::DomainSpec domain;
  pddl::ProblemSpec problem;
  try {
    domain = pddl::parse_domain(*domain_text);
  } catch (const pddl::ParseError& e) {
    throw StepFailure(step, std::string("the domain is not valid PDDL: ") + e.what());
  }
  try {
    problem = pddl::parse_problem(*problem_text, domain);
  } catch (const pddl::ParseError& e) {
    throw StepFailure(step, std::string("the problem is not valid PDDL: ") + e.what());
  }
  planner::PlanResult result = planner::solve(domain, problem, c.manifest.config.planner);
  json stats = {{"expanded", result.stats.expanded},
                {"generated", result.stats.generated},
                {"evaluated", result.stats.evaluated},
                {"facts", result.stats.facts},
                {"ground_actions", result.stats.ground_actions}};
  r.artifact = {{"outcome", planner::to_string(result.outcome)},
                {"message", ""},
                {"plan", nullptr},
                {"cost", nullptr},
                {"length", nullptr},
                {"plan_valid", false},
                {"detail", result.detail},
                {"stats", stats}};
  switch (result.outcome) {
    case planner::Outcome::Solved: {
      planner::PlanCheck check = planner::validate_plan(domain, problem, *result.plan);
      if (!check.valid) throw StepFailure(step, "planner returned an invalid plan: " + check.error);
      r.artifact["plan"] = pddl::print_plan(*result.plan);
      r.artifact["cost"] = result.plan->cost;
      r.artifact["length"] = result.plan->steps.size();
      r.artifact["plan_valid"] = true;
      break;
    }
    case planner::Outcome::Unsolvable:
      r.artifact["message"] = std::string(kNoPlanFound);
      break;
    case planner::Outcome::ResourceLimit:
      r.artifact["message"] = "planner stopped at a resource limit: " + result.detail;
      break;
  }
}

TypeList types_from_edit(const RunStore& store, const std::string& text) {
  // Every type named on the left of an edited hierarchy counts as requested.
  std::map<std::string, std::string> known;
  if (auto rec = store.load_step(StepId::TypeExtraction)) {
    for (const auto& t : rec->artifact.at("types").get<TypeList>()) known[t.name] = t.description;
  }
  TypeList out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string name = pddl::to_lower(line.substr(0, colon));
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t\r") + 1);
    std::replace(name.begin(), name.end(), ' ', '_');
    if (name.empty() || name == pddl::kRootType) continue;
    out.push_back({name, known.count(name) ? known[name] : ""});
  }
  return out;
}

std::string block_or_text(const std::string& text, std::string_view tag) {
  if (text.find("```") == std::string::npos) return text;
  return extract_block(text, tag);
}

}  // namespace

pddl::ProblemSpec to_problem(const pddl::TaskDraft& draft, const pddl::DomainSpec& domain,
                             std::vector<std::string>* warnings) {
  pddl::ProblemSpec p;
  p.name = kProblemName;
  p.domain_name = domain.name;
  p.objects = draft.objects;
  for (const auto& f : draft.init) {
    if (f.kind == pddl::Formula::Kind::Atom) {
      p.init.push_back(f.atom);
    } else if (warnings) {
      warnings->push_back("dropped initial-state entry " + pddl::print_formula(f));
    }
  }
  p.initial_cost = draft.initial_cost;
  if (domain.uses_action_costs() && !p.initial_cost) p.initial_cost = 0;
  p.goal = draft.goal;
  return p;
}

std::string new_run_id() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  std::uniform_int_distribution<unsigned> byte(0, 255);
  unsigned char b[16];
  for (auto& x : b) x = static_cast<unsigned char>(byte(rng));
  b[6] = static_cast<unsigned char>((b[6] & 0x0f) | 0x40);
  b[8] = static_cast<unsigned char>((b[8] & 0x3f) | 0x80);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 16; ++i) {
    if (i == 4 || i == 6 || i == 8 || i == 10) out += '-';
    out += hex[b[i] >> 4];
    out += hex[b[i] & 0xf];
  }
  return out;
}

RunManifest create_run(const fs::path& dir, const RunInputs& in) {
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; };
  if (blank(in.description)) throw std::invalid_argument("the description is empty");
  if (auto err = config_error(in.config)) throw std::invalid_argument(*err);
  const StepId start = in.config.start_step;
  if (start >= StepId::TaskExtraction && !in.domain_text) {
    throw std::invalid_argument("starting at " + std::string(to_string(start)) + " needs a domain");
  }
  if (start == StepId::Planning && !in.problem_text) {
    throw std::invalid_argument("starting at planning needs a problem");
  }
  RunStore store(dir);
  if (store.exists()) throw std::invalid_argument(dir.string() + " already holds a run");
  fs::create_directories(dir);
  if (start >= StepId::TaskExtraction) {
    pddl::DomainSpec domain;
    try {
      domain = pddl::parse_domain(*in.domain_text);
    } catch (const pddl::ParseError& e) {
      throw EditError(std::string("domain: ") + e.what());
    }
    store.write_file("domain.pddl", pddl::print_domain(domain));
    if (start == StepId::Planning) {
      try {
        store.write_file("problem.pddl", pddl::print_problem(pddl::parse_problem(*in.problem_text, domain)));
      } catch (const pddl::ParseError& e) {
        throw EditError(std::string("problem: ") + e.what());
      }
    }
  }
  RunManifest m;
  m.id = in.id.empty() ? new_run_id() : in.id;
  m.created = llm::utc_timestamp();
  m.description = in.description;
  m.task_description = in.task_description;
  m.config = in.config;
  m.status = RunStatus::Running;
  m.current_step = start;
  store.save_manifest(m);
  return m;
}

const llm::TemplateLibrary& Pipeline::default_templates() {
  static const llm::TemplateLibrary lib = llm::TemplateLibrary::embedded();
  return lib;
}

Pipeline::Pipeline(const RunStore& store, llm::Provider& provider,
                   const llm::TemplateLibrary& templates)
    : store_(store), provider_(provider), templates_(templates) {}

void Pipeline::refresh(RunManifest& m) const {
  m.completed_steps.clear();
  for (int i = 1; i <= kStepCount; ++i) {
    auto rec = store_.load_step(step_at(i));
    if (rec && rec->status == StepStatus::Done) m.completed_steps.push_back(i);
  }
}

void Pipeline::write_outputs(const StepRecord& r) {
  switch (r.step) {
    case StepId::ActionConstruction:
      store_.write_file("domain.pddl", r.artifact.at("domain").get<std::string>());
      break;
    case StepId::TaskExtraction:
      store_.write_file("problem.pddl", r.artifact.at("problem").get<std::string>());
      break;
    case StepId::Planning: {
      const std::string outcome = r.artifact.at("outcome");
      store_.remove_file("plan.txt");
      store_.remove_file("NO_PLAN");
      if (outcome == "plan") store_.write_file("plan.txt", r.artifact.at("plan").get<std::string>());
      if (outcome == "unsolvable") store_.write_file("NO_PLAN", std::string(kNoPlanFound) + "\n");
      break;
    }
    default:
      break;
  }
}

void Pipeline::finish_step(RunManifest& m, StepState& st) {
  const StepRecord& r = st.record;
  store_.save_step(r, st.exchanges);
  if (r.status == StepStatus::Done) write_outputs(r);
  store_.write_usage();
  refresh(m);
  m.degraded = m.degraded || r.degraded;
  if (r.status == StepStatus::AwaitingFeedback) {
    m.status = RunStatus::AwaitingHumanFeedback;
    m.current_step = r.step;
  } else if (r.step == StepId::Planning) {
    const std::string outcome = r.artifact.at("outcome");
    m.outcome = outcome;
    if (outcome == "resource-limit") {
      m.status = RunStatus::Failed;
      m.current_step = r.step;
      m.error = "planning: " + r.artifact.at("message").get<std::string>();
    } else {
      m.status = RunStatus::Done;
      m.current_step.reset();
    }
  } else {
    m.current_step = step_at(step_number(r.step) + 1);
  }
  store_.save_manifest(m);
  if (r.status == StepStatus::Done && after_step_) after_step_(r.step);
}

void Pipeline::run_step(RunManifest& m, StepId step) {
  StepState st;
  st.record.step = step;
  Caller caller(provider_, m.config, st);
  Ctx c{store_, m, templates_, caller, st};
  switch (step) {
    case StepId::TypeExtraction:
    case StepId::TypeHierarchy:
    case StepId::ActionExtraction:
      run_simple(c);
      break;
    case StepId::ActionConstruction:
      run_action_construction(c);
      break;
    case StepId::TaskExtraction:
      run_task_extraction(c);
      break;
    case StepId::Planning:
      run_planning(c);
      break;
  }
  finish_step(m, st);
}

RunManifest Pipeline::advance() {
  RunManifest m = store_.load_manifest();
  if (m.status == RunStatus::Done || m.status == RunStatus::AwaitingHumanFeedback) return m;
  m.status = RunStatus::Running;
  m.error.clear();
  store_.save_manifest(m);
  for (int i = step_number(m.config.start_step); i <= kStepCount; ++i) {
    StepId step = step_at(i);
    auto rec = store_.load_step(step);
    if (rec && rec->status == StepStatus::Done) continue;
    if (rec) {
      m.status = RunStatus::AwaitingHumanFeedback;
      m.current_step = step;
      store_.save_manifest(m);
      return m;
    }
    m.current_step = step;
    try {
      run_step(m, step);
    } catch (const std::exception& e) {
      m.status = RunStatus::Failed;
      m.current_step = step;
      m.error = dynamic_cast<const StepFailure*>(&e)
                    ? std::string(e.what())
                    : std::string(to_string(step)) + ": " + e.what();
      refresh(m);
      store_.save_manifest(m);
      return m;
    }
    if (m.status != RunStatus::Running) return m;
  }
  return m;
}

void Pipeline::continue_step(RunManifest& m, StepId step, const HumanInput& input) {
  StepState st;
  st.record = *store_.load_step(step);
  st.exchanges = store_.load_exchanges(step);
  Caller caller(provider_, m.config, st);
  Ctx c{store_, m, templates_, caller, st};
  StepRecord& r = st.record;
  if (input.kind == HumanInput::Kind::Approve) {
    r.feedback = FeedbackRound{FeedbackSource::Human, "approved", ""};
  } else {
    switch (step) {
      case StepId::TypeExtraction:
      case StepId::TypeHierarchy:
      case StepId::ActionExtraction:
        revise_simple(c, simple_step(c), input.text);
        break;
      case StepId::ActionConstruction:
        revise_actions(c, input.text);
        break;
      case StepId::TaskExtraction: {
        TaskWork w = task_work(c);
        w.revise(input.text);
        break;
      }
      case StepId::Planning:
        throw StateError("planning takes no feedback");
    }
    r.feedback = FeedbackRound{FeedbackSource::Human, "revised", input.text};
  }
  r.status = StepStatus::Done;
  m.status = RunStatus::Running;
  finish_step(m, st);
}

RunManifest Pipeline::submit_feedback(StepId step, const HumanInput& input) {
  RunManifest m = store_.load_manifest();
  if (m.status != RunStatus::AwaitingHumanFeedback || m.current_step != step) {
    throw StateError("run is not waiting for feedback on " + std::string(to_string(step)));
  }
  if (input.kind == HumanInput::Kind::Edit) return resume(step, input.text);
  if (input.kind == HumanInput::Kind::Feedback &&
      input.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw std::invalid_argument("feedback text is empty");
  }
  try {
    continue_step(m, step, input);
  } catch (const StateError&) {
    throw;
  } catch (const std::exception& e) {
    m.status = RunStatus::Failed;
    m.current_step = step;
    m.error = std::string(to_string(step)) + ": " + e.what();
    store_.save_manifest(m);
    return m;
  }
  return auto_advance_ ? advance() : store_.load_manifest();
}

StepRecord Pipeline::edited_record(const RunManifest& m, StepId step, const std::string& text) const {
  StepRecord r;
  r.step = step;
  r.edit = text;
  try {
    switch (step) {
      case StepId::TypeExtraction:
        r.artifact = {{"types", parse_types(block_or_text(text, "types"), &r.warnings)}};
        break;
      case StepId::TypeHierarchy: {
        std::string block = block_or_text(text, "hierarchy");
        r.artifact = {{"types", tree_to_json(parse_hierarchy(block, types_from_edit(store_, block),
                                                             &r.warnings))}};
        break;
      }
      case StepId::ActionExtraction:
        r.artifact = {{"actions", parse_actions(block_or_text(text, "actions"), &r.warnings)}};
        break;
      case StepId::ActionConstruction: {
        pddl::DomainSpec d = pddl::parse_domain(text);
        r.artifact = {{"domain", pddl::print_domain(d)},
                      {"unpruned_domain", pddl::print_domain(d)},
                      {"pruned_predicates", json::array()},
                      {"pruned_types", json::array()},
                      {"flawed_actions", json::array()}};
        break;
      }
      case StepId::TaskExtraction: {
        auto domain_text = store_.read_file("domain.pddl");
        if (!domain_text) throw EditError("no domain to check the problem against");
        pddl::DomainSpec d = pddl::parse_domain(*domain_text);
        pddl::ProblemSpec p;
        if (text.find("(define") != std::string::npos) {
          p = pddl::parse_problem(text, d);
        } else {
          p = pddl::parse_problem(pddl::print_problem(to_problem(
                                      pddl::parse_task_draft(block_or_text(text, "task")), d, &r.warnings)),
                                  d);
        }
        pddl::TaskDraft task{p.objects, {}, p.initial_cost, p.goal};
        for (const auto& a : p.init) task.init.push_back(pddl::Formula::make_atom(a));
        r.artifact = {{"problem", pddl::print_problem(p)},
                      {"task", pddl::print_task_block(task)},
                      {"validations", 0},
                      {"passed", true}};
        break;
      }
      case StepId::Planning:
        throw EditError("the planning step has no editable artifact");
    }
  } catch (const EditError&) {
    throw;
  } catch (const std::exception& e) {
    throw EditError(std::string(to_string(step)) + ": " + e.what());
  }
  (void)m;
  return r;
}

RunManifest Pipeline::resume(std::optional<StepId> from, std::optional<std::string> edit,
                             std::optional<std::string> task_description) {
  RunManifest m = store_.load_manifest();
  if (!from) {
    if (edit) throw std::invalid_argument("an edit needs a step");
    if (task_description) throw std::invalid_argument("a new task description needs a step");
    if (m.status == RunStatus::Done || m.status == RunStatus::AwaitingHumanFeedback) return m;
    m.status = RunStatus::Running;
    store_.save_manifest(m);
    return auto_advance_ ? advance() : m;
  }
  const StepId step = *from;
  if (step < m.config.start_step) {
    throw StateError("run starts at " + std::string(to_string(m.config.start_step)));
  }
  if (task_description && step > StepId::TaskExtraction) {
    throw std::invalid_argument("a new task description needs a resume at or before task_extraction");
  }
  bool reached = store_.load_step(step).has_value();
  if (!reached) {
    for (int i = step_number(m.config.start_step); i < step_number(step); ++i) {
      auto rec = store_.load_step(step_at(i));
      if (!rec || rec->status != StepStatus::Done) {
        throw StateError("step " + std::string(to_string(step)) + " has not been reached");
      }
    }
  }
  std::optional<StepRecord> edited;
  if (edit) edited = edited_record(m, step, *edit);

  m.superseded += 1;
  store_.supersede(step, m.superseded);
  if (task_description) m.task_description = task_description;
  m.status = RunStatus::Running;
  m.outcome.clear();
  m.error.clear();
  m.degraded = false;
  m.current_step = step;
  if (edited) {
    StepState st;
    st.record = std::move(*edited);
    finish_step(m, st);
  } else {
    refresh(m);
    store_.write_usage();
    store_.save_manifest(m);
  }
  return auto_advance_ ? advance() : m;
}

RunManifest run_pipeline(const fs::path& dir, const RunInputs& inputs, llm::Provider& provider) {
  create_run(dir, inputs);
  RunStore store(dir);
  return Pipeline(store, provider).advance();
}

}  // namespace nl2plan::pipeline
