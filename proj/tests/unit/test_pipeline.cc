#include <doctest.h>

#include <nlohmann/json.hpp>

#include "nl2plan/llm/transcript.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/pddl/printer.h"
#include "nl2plan/pipeline/baseline.h"
#include "nl2plan/pipeline/pipeline.h"
#include "nl2plan/planner/plan_check.h"
#include "test_support.h"

using namespace nl2plan;
using namespace nl2plan::pipeline;
using nl2plan::testing::data_path;
using nl2plan::testing::read_file;
using nl2plan::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string blocksworld_description() {
  return read_file(data_path("descriptions/blocksworld_domain.txt")) + "\n" +
         read_file(data_path("descriptions/blocksworld_easy.txt"));
}

RunInputs inputs(std::string description, FeedbackSource feedback = FeedbackSource::None) {
  RunInputs in;
  in.id = "test-run";
  in.description = std::move(description);
  in.config.set_feedback(feedback);
  in.config.provider.kind = llm::ProviderKind::Scripted;
  return in;
}

std::string block(const std::string& tag, const std::string& body) {
  return "Reasoning.\n```" + tag + "\n" + body + "\n```";
}

const char* kGoodPaint =
    ":parameters (?i - item)\n:precondition (not (painted ?i))\n:effect (painted ?i)\n"
    ":new-predicates\n(painted ?i - item) ; the item is painted";
const char* kBadPaint =
    ":parameters (?i - item)\n:precondition (not (painted ?i ?i))\n:effect (painted ?i)\n"
    ":new-predicates\n(painted ?i - item) ; the item is painted";

// Steps 1 to 3 of a one-type, one-action domain.
void push_front_steps(llm::ScriptedProvider& p) {
  p.push("type_extraction", block("types", "item: a thing to paint"));
  p.push("type_hierarchy", block("hierarchy", "item: object"));
  p.push("action_extraction",
         block("actions", "name: paint\ndescription: paint an item\nexample: paint item i1"));
}

const char* kPaintTask = "(:objects i1 - item)\n(:init)\n(:goal (painted i1))";

RunManifest run(const TempDir& dir, const RunInputs& in, llm::Provider& provider) {
  return run_pipeline(dir.path() / "run", in, provider);
}

size_t unused(const llm::ScriptedProvider& p) {
  size_t n = 0;
  for (const auto& [id, left] : p.remaining()) n += left;
  return n;
}

}  // namespace

TEST_CASE("types block: normalization, duplicates and object") {
  std::vector<std::string> warnings;
  TypeList t = parse_types("- Robot Arm: holds blocks\nblock: a cube\nobject: anything\nBLOCK: again\n",
                           &warnings);
  REQUIRE(t.size() == 2);
  CHECK(t[0].name == "robot_arm");
  CHECK(t[1].name == "block");
  CHECK(warnings.size() == 2);
  CHECK_THROWS_AS(parse_types("\n\n"), StepOutputError);
  CHECK_THROWS_AS(parse_types("and: a reserved word"), StepOutputError);
}

TEST_CASE("hierarchy block: synthesized parents and cycles") {
  TypeList req{{"truck", "a vehicle"}, {"van", "a vehicle"}, {"depot", ""}};
  std::vector<std::string> warnings;
  TypeTree tree = parse_hierarchy("truck: vehicle\nvan: vehicle\ndepot: object\nghost: object\n",
                                  req, &warnings);
  CHECK(tree.hierarchy.parent_of("truck") == "vehicle");
  CHECK(tree.hierarchy.parent_of("vehicle") == "object");
  CHECK(tree.origin.at("vehicle") == TypeOrigin::SynthesizedParent);
  CHECK(tree.origin.at("truck") == TypeOrigin::Requested);
  CHECK_FALSE(tree.hierarchy.contains("ghost"));
  CHECK(warnings.size() == 1);

  CHECK_THROWS_AS(parse_hierarchy("truck: van\nvan: truck\ndepot: object\n", req), StepOutputError);
  CHECK_THROWS_AS(parse_hierarchy("truck: object\nvan: object\n", req), StepOutputError);

  json j = tree_to_json(tree);
  CHECK(tree_from_json(j) == tree);
}

TEST_CASE("actions block: records, aliases and duplicates") {
  std::vector<std::string> warnings;
  auto a = parse_actions(
      "name: drive\ndescription: move a truck\n  between depots\nusage example: drive t1\n\n"
      "name: drive\ndescription: again\nexample: x\n\n"
      "name: load\ndescription: put a package in\nexample: load p1\n",
      &warnings);
  REQUIRE(a.size() == 2);
  CHECK(a[0].description == "move a truck between depots");
  CHECK(a[0].example == "drive t1");
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(parse_actions("name: drive\nexample: x\n"), StepOutputError);
}

TEST_CASE("fenced blocks and the feedback sentinel") {
  CHECK(extract_block("text\n```types\na: b\n```\n", "types") == "a: b\n");
  CHECK_THROWS_WITH_AS(extract_block("no block", "types"), doctest::Contains("types"),
                       StepOutputError);
  CHECK_THROWS_AS(extract_block("```types\na\n```\n```types\nb\n```", "types"), StepOutputError);
  CHECK_THROWS_AS(extract_block("```types\na\n", "types"), StepOutputError);
  CHECK_FALSE(parse_feedback("Looks fine.\n```feedback\nNo feedback.\n```").has_value());
  CHECK_FALSE(parse_feedback("no feedback").has_value());
  CHECK(parse_feedback("```feedback\n1. Add a type.\n```").value() == "1. Add a type.");
}

TEST_CASE("pruning removes unreferenced predicates and types") {
  pddl::DomainSpec d = pddl::parse_domain(R"((define (domain d)
    (:types thing spare - object)
    (:predicates (p ?x - thing) (unused-p ?s - spare))
    (:action a :parameters (?x - thing) :precondition (p ?x) :effect (not (p ?x)))))");
  PruneResult r = prune_domain(d);
  CHECK(r.predicates == std::vector<std::string>{"unused-p"});
  CHECK(r.types == std::vector<std::string>{"spare"});
  CHECK(d.find_predicate("unused-p") == nullptr);
  CHECK_FALSE(d.hierarchy.contains("spare"));
  CHECK(pddl::parse_domain(pddl::print_domain(d)) == d);
}

TEST_CASE("scripted blocksworld run") {
  TempDir dir("pipeline");
  auto provider = llm::ScriptedProvider::from_file(data_path("scripts/blocksworld.script"));
  RunManifest m = run(dir, inputs(blocksworld_description(), FeedbackSource::Llm), *provider);
  INFO(m.error);
  REQUIRE(m.status == RunStatus::Done);
  CHECK(unused(*provider) == 0);
  CHECK(m.outcome == "plan");
  CHECK_FALSE(m.degraded);
  CHECK(m.completed_steps == std::vector<int>{1, 2, 3, 4, 5, 6});

  RunStore store(dir.path() / "run");
  auto s2 = store.load_step(StepId::TypeHierarchy).value();
  CHECK(s2.artifact["types"][2]["origin"] == "synthesized-parent");

  auto s3 = store.load_step(StepId::ActionExtraction).value();
  CHECK(s3.feedback->outcome == "revised");
  CHECK(s3.original_artifact["actions"].size() == 3);
  CHECK(s3.artifact["actions"].size() == 4);

  auto s4 = store.load_step(StepId::ActionConstruction).value();
  REQUIRE(s4.actions.size() == 4);
  for (const auto& a : s4.actions) {
    CHECK(a.passes.size() == 2);
    for (const auto& p : a.passes) CHECK(p.validator_messages <= 8);
  }
  CHECK(s4.actions[3].passes[0].validator_messages == 1);
  CHECK(s4.actions[3].passes[0].reports[0].issues[0].code == validate::IssueCode::ArityMismatch);
  CHECK(s4.actions[2].feedback->outcome == "revised");
  CHECK(s4.artifact["pruned_predicates"] == json::array({"resting-on"}));
  CHECK(s4.artifact["pruned_types"] == json::array({"table"}));

  auto s5 = store.load_step(StepId::TaskExtraction).value();
  CHECK(s5.validations.size() == 2);
  CHECK(s5.validations[0].issues[0].code == validate::IssueCode::NegationInInit);

  auto domain = pddl::parse_domain(*store.read_file("domain.pddl"));
  auto problem = pddl::parse_problem(*store.read_file("problem.pddl"), domain);
  auto plan = pddl::parse_plan(*store.read_file("plan.txt"));
  CHECK(plan.steps.size() == 4);
  CHECK(planner::validate_plan(domain, problem, plan).valid);

  auto usage = json::parse(*store.read_file("usage.json"));
  CHECK(usage == json(llm::usage_totals(store.all_exchanges())));
}

TEST_CASE("validator budget: nine failing drafts give eight messages") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  push_front_steps(p);
  p.push("action_construction", block("action", kBadPaint));
  for (int i = 0; i < 8; ++i) p.push("action_construction.revision", block("action", kBadPaint));
  p.push("action_construction", block("action", kGoodPaint));
  p.push("task_extraction", block("task", kPaintTask));
  RunManifest m = run(dir, inputs("Paint the item."), p);
  REQUIRE(m.status == RunStatus::Done);
  CHECK(unused(p) == 0);
  auto s4 = RunStore(dir.path() / "run").load_step(StepId::ActionConstruction).value();
  const ActionPass& first = s4.actions[0].passes[0];
  CHECK(first.drafts == 9);
  CHECK(first.validator_messages == 8);
  CHECK(first.reports.size() == 9);
  CHECK(first.accepted_flawed);
  CHECK_FALSE(s4.actions[0].passes[1].accepted_flawed);
  CHECK(s4.artifact["flawed_actions"].empty());
  CHECK_FALSE(m.degraded);
}

TEST_CASE("validator budget: flawed action in the final pass degrades the run") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  push_front_steps(p);
  for (int pass = 0; pass < 2; ++pass) {
    p.push("action_construction", block("action", kBadPaint));
    for (int i = 0; i < 8; ++i) p.push("action_construction.revision", block("action", kBadPaint));
  }
  p.push("task_extraction", block("task", kPaintTask));
  RunManifest m = run(dir, inputs("Paint the item."), p);
  CHECK(m.degraded);
  auto s4 = RunStore(dir.path() / "run").load_step(StepId::ActionConstruction).value();
  CHECK(s4.artifact["flawed_actions"] == json::array({"paint"}));
  CHECK(s4.degraded);
}

TEST_CASE("validator round fixes an arity error") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  push_front_steps(p);
  p.push("action_construction", block("action", kBadPaint));
  p.push("action_construction.revision", block("action", kGoodPaint));
  p.push("action_construction", block("action", kGoodPaint));
  p.push("task_extraction", block("task", kPaintTask));
  RunManifest m = run(dir, inputs("Paint the item."), p);
  REQUIRE(m.status == RunStatus::Done);
  auto s4 = RunStore(dir.path() / "run").load_step(StepId::ActionConstruction).value();
  CHECK(s4.actions[0].passes[0].validator_messages == 1);
  CHECK(s4.actions[0].passes[0].reports.back().passed());
}

TEST_CASE("task extraction: shadowing object regenerated, negated goal accepted") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  push_front_steps(p);
  p.push("action_construction", block("action", kGoodPaint));
  p.push("action_construction", block("action", kGoodPaint));
  p.push("task_extraction", block("task", "(:objects item - item)\n(:init)\n(:goal (painted item))"));
  p.push("task_extraction.revision",
         block("task", "(:objects i1 i2 - item)\n(:init (painted i2))\n"
                       "(:goal (and (painted i1) (not (painted i2))))"));
  RunManifest m = run(dir, inputs("Paint the item."), p);
  RunStore store(dir.path() / "run");
  auto s5 = store.load_step(StepId::TaskExtraction).value();
  REQUIRE(s5.validations.size() == 2);
  CHECK(s5.validations[0].issues[0].code == validate::IssueCode::ObjectShadowsType);
  CHECK(s5.validations[1].passed());
  CHECK(m.outcome == "unsolvable");
  CHECK(read_file(dir.path() / "run" / "NO_PLAN") == "No plan found\n");
  CHECK_FALSE(store.read_file("plan.txt").has_value());
  CHECK(m.status == RunStatus::Done);
}

TEST_CASE("task extraction: budget exhaustion accepts the task flawed") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  push_front_steps(p);
  p.push("action_construction", block("action", kGoodPaint));
  p.push("action_construction", block("action", kGoodPaint));
  const char* bad = "(:objects i1 - item)\n(:init (not (painted i1)))\n(:goal (painted i1))";
  p.push("task_extraction", block("task", bad));
  for (int i = 0; i < 7; ++i) p.push("task_extraction.revision", block("task", bad));
  RunManifest m = run(dir, inputs("Paint the item."), p);
  CHECK(unused(p) == 0);
  CHECK(m.degraded);
  auto s5 = RunStore(dir.path() / "run").load_step(StepId::TaskExtraction).value();
  CHECK(s5.validations.size() == 8);
  CHECK(s5.artifact["passed"] == false);
  CHECK(m.status == RunStatus::Done);
}

TEST_CASE("format retry: one reminder, then the step fails") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  p.push("type_extraction", "I forgot the block.");
  p.push("type_extraction.retry", block("types", "item: a thing"));
  p.push("type_hierarchy", "still no block");
  p.push("type_hierarchy.retry", "and again no block");
  RunManifest m = run(dir, inputs("Paint the item."), p);
  CHECK(m.status == RunStatus::Failed);
  CHECK(m.current_step == StepId::TypeHierarchy);
  CHECK(m.error.find("type_hierarchy") != std::string::npos);
  RunStore store(dir.path() / "run");
  auto s1 = store.load_step(StepId::TypeExtraction).value();
  REQUIRE(s1.calls.size() == 2);
  CHECK(s1.calls[1].purpose == "format-retry");
  CHECK(s1.calls[1].prompt.find("```types") != std::string::npos);
  CHECK_FALSE(store.load_step(StepId::TypeHierarchy).has_value());
}

TEST_CASE("human feedback: approve, revise and state errors") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  p.push("type_extraction", block("types", "item: a thing"));
  RunInputs in = inputs("Paint the item.", FeedbackSource::Human);
  RunManifest m = run(dir, in, p);
  REQUIRE(m.status == RunStatus::AwaitingHumanFeedback);
  CHECK(m.current_step == StepId::TypeExtraction);

  RunStore store(dir.path() / "run");
  Pipeline pipe(store, p);
  CHECK_THROWS_AS(pipe.submit_feedback(StepId::TypeHierarchy, {}), StateError);

  p.push("type_hierarchy", block("hierarchy", "item: object"));
  m = pipe.submit_feedback(StepId::TypeExtraction, {HumanInput::Kind::Approve, ""});
  CHECK(m.current_step == StepId::TypeHierarchy);
  CHECK(store.load_step(StepId::TypeExtraction)->feedback->outcome == "approved");

  p.push("type_hierarchy.revision", block("hierarchy", "item: goods\ngoods: object"));
  p.push("action_extraction",
         block("actions", "name: paint\ndescription: paint an item\nexample: paint item i1"));
  m = pipe.submit_feedback(StepId::TypeHierarchy, {HumanInput::Kind::Feedback, "Add goods."});
  auto s2 = store.load_step(StepId::TypeHierarchy).value();
  CHECK(s2.feedback->outcome == "revised");
  CHECK(s2.feedback->text == "Add goods.");
  CHECK(s2.artifact["types"].size() == 2);
  CHECK(m.current_step == StepId::ActionExtraction);
  CHECK(m.status == RunStatus::AwaitingHumanFeedback);
}

TEST_CASE("resume with an edit supersedes downstream records") {
  TempDir dir("pipeline");
  auto provider = llm::ScriptedProvider::from_file(data_path("scripts/blocksworld.script"));
  RunManifest m = run(dir, inputs(blocksworld_description(), FeedbackSource::Llm), *provider);
  REQUIRE(m.status == RunStatus::Done);
  RunStore store(dir.path() / "run");
  Pipeline pipe(store, *provider);

  CHECK_THROWS_AS(pipe.resume(StepId::TypeHierarchy, std::string("block: table\ntable: block\n")),
                  EditError);
  CHECK(store.load_manifest().superseded == 0);

  std::string domain = *store.read_file("domain.pddl");
  provider->push("task_extraction",
                 block("task", "(:objects a b - block)\n(:init (on-table a) (on-table b) (clear a) "
                               "(clear b) (arm-empty))\n(:goal (on a b))"));
  provider->push("task_extraction.feedback", "```feedback\nNo feedback.\n```");
  m = pipe.resume(StepId::TaskExtraction, std::nullopt, std::string("Put a on b."));
  REQUIRE(m.status == RunStatus::Done);
  CHECK(m.superseded == 1);
  CHECK(fs::exists(dir.path() / "run" / "superseded" / "1" / "step_5.json"));
  CHECK(fs::exists(dir.path() / "run" / "superseded" / "1" / "plan.txt"));
  CHECK(*store.read_file("domain.pddl") == domain);
  CHECK(pddl::parse_plan(*store.read_file("plan.txt")).steps.size() == 2);

  // A resume at an unreached step is refused.
  TempDir other("pipeline");
  llm::ScriptedProvider p("");
  p.push("type_extraction", block("types", "item: a thing"));
  p.push("type_hierarchy", "no block");
  p.push("type_hierarchy.retry", "no block");
  run(other, inputs("x"), p);
  RunStore failed(other.path() / "run");
  CHECK_THROWS_AS(Pipeline(failed, p).resume(StepId::ActionConstruction), StateError);
}

TEST_CASE("domain reuse runs task extraction and planning only") {
  TempDir dir("pipeline");
  llm::ScriptedProvider p("");
  p.push("task_extraction", block("task", kPaintTask));
  RunInputs in = inputs("Paint i1.");
  in.config.start_step = StepId::TaskExtraction;
  CHECK_THROWS_AS(create_run(dir.path() / "x", in), std::invalid_argument);
  in.domain_text =
      "(define (domain paint) (:types item) (:predicates (painted ?i - item))"
      " (:action paint :parameters (?i - item) :precondition (not (painted ?i)) :effect (painted ?i)))";
  RunManifest m = run(dir, in, p);
  REQUIRE(m.status == RunStatus::Done);
  CHECK(m.completed_steps == std::vector<int>{5, 6});
  RunStore store(dir.path() / "run");
  for (int i = 1; i <= 4; ++i) CHECK_FALSE(store.load_step(step_at(i)).has_value());
  auto usage = json::parse(*store.read_file("usage.json"));
  CHECK(usage["steps"].size() == 1);
}

TEST_CASE("an interrupted run continues after the last persisted step") {
  for (int stop = 1; stop <= 5; ++stop) {
    CAPTURE(stop);
    TempDir dir("pipeline");
    auto provider = llm::ScriptedProvider::from_file(data_path("scripts/blocksworld.script"));
    RunInputs in = inputs(blocksworld_description(), FeedbackSource::Llm);
    create_run(dir.path() / "run", in);
    RunStore store(dir.path() / "run");
    {
      Pipeline pipe(store, *provider);
      pipe.set_after_step([&](StepId s) {
        if (step_number(s) == stop) throw stop;
      });
      CHECK_THROWS_AS(pipe.advance(), int);
    }
    CHECK(store.load_manifest().status == RunStatus::Running);
    RunManifest m = Pipeline(store, *provider).resume(std::nullopt);
    CHECK(m.status == RunStatus::Done);
    CHECK(unused(*provider) == 0);
  }
}

TEST_CASE("config text") {
  TempDir dir("pipeline");
  RunConfig c = parse_config_text(
      "# comment\n[provider]\nkind = \"replay\"\ntranscript_dir = \"t\"\n[pipeline]\n"
      "feedback = \"llm\"\nmax_validator_messages = 3\n[planner]\nalgorithm = \"ucs\"\n",
      dir.path());
  CHECK(c.provider.kind == llm::ProviderKind::Replay);
  CHECK(c.provider.transcript_dir == dir.path() / "t");
  CHECK(c.feedback_for(StepId::TaskExtraction) == FeedbackSource::Llm);
  CHECK(c.max_validator_messages == 3);
  CHECK_THROWS_AS(parse_config_text("[pipeline]\nbogus = 1\n", dir.path()), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[pipeline]\nmax_validator_messages = x\n", dir.path()),
                  std::invalid_argument);
  RunConfig back = json(c).get<RunConfig>();
  CHECK(json(back) == json(c));
  RunConfig bad;
  bad.max_task_validations = 0;
  CHECK(config_error(bad).has_value());
}

TEST_CASE("baseline prompt") {
  auto provider = llm::ScriptedProvider::from_file(data_path("scripts/baseline.script"));
  RunConfig config;
  CHECK_THROWS_AS(baseline_cot(*provider, Pipeline::default_templates(), "domain", " \n", config),
                  std::invalid_argument);
  CHECK(provider->remaining().at("baseline_cot") == 1);
  std::vector<llm::ChatExchange> ex;
  std::string text =
      baseline_cot(*provider, Pipeline::default_templates(), "Blocks.", "Swap a and b.", config, &ex);
  CHECK(text.find("stack a on b") != std::string::npos);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].request.messages[0].content.find("Let's think step by step") != std::string::npos);
}
