#include <doctest.h>

#include <chrono>
#include <functional>
#include <random>

#include "lifted_oracle.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/planner/heuristic.h"
#include "nl2plan/planner/plan_check.h"
#include "nl2plan/planner/search.h"
#include "test_support.h"

using namespace nl2plan;
using namespace nl2plan::planner;
using nl2plan::testing::data_path;
using nl2plan::testing::read_file;

namespace {

struct Instance {
  pddl::DomainSpec domain;
  pddl::ProblemSpec problem;
};

Instance load(const std::string& family, const std::string& problem) {
  Instance out;
  out.domain = pddl::parse_domain(read_file(data_path("pddl/" + family + "-domain.pddl")));
  out.problem = pddl::parse_problem(
      read_file(data_path("pddl/" + family + "-" + problem + ".pddl")), out.domain);
  return out;
}

testing::AtomSet to_atoms(const GroundTask& task, const State& s,
                          const pddl::ProblemSpec& problem,
                          const pddl::DomainSpec& domain) {
  testing::AtomSet out;
  for (FactId f = 0; f < static_cast<FactId>(task.facts.size()); ++f) {
    if (s.test(f)) out.insert(task.facts[static_cast<size_t>(f)]);
  }
  // Static atoms never become facts; they stay as in the initial state.
  for (const auto& a : problem.init) {
    bool in_effect = false;
    std::function<void(const pddl::Effect&)> scan = [&](const pddl::Effect& e) {
      if (e.kind == pddl::Effect::Kind::Literal && e.atom.predicate == a.predicate) {
        in_effect = true;
      }
      for (const auto& c : e.children) scan(c);
    };
    for (const auto& act : domain.actions) scan(act.effect);
    if (!in_effect) out.insert(a);
  }
  return out;
}

std::string step_key(const pddl::PlanStep& step) {
  std::string out = step.action;
  for (const auto& a : step.args) out += " " + a;
  return out;
}

const std::vector<std::pair<std::string, std::string>> kSolvable = {
    {"blocksworld", "easy"},   {"blocksworld", "medium"}, {"blocksworld", "hard"},
    {"blocksworld", "sussman"}, {"isr", "problem"},       {"logistics", "problem"},
    {"adl", "problem"},        {"empty", "problem"}};

}  // namespace

TEST_CASE("blocksworld fixtures need exactly 4, 8 and 12 steps") {
  // Frozen from the breadth-first oracle.
  const std::vector<std::pair<std::string, long>> expected = {
      {"easy", 4}, {"medium", 8}, {"hard", 12}};
  for (const auto& [name, length] : expected) {
    CAPTURE(name);
    Instance in = load("blocksworld", name);
    testing::OracleOptimum opt = testing::oracle_optimum(in.domain, in.problem, 100000);
    REQUIRE(opt.exhausted);
    REQUIRE(opt.length.has_value());
    CHECK(*opt.length == length);
  }
}

TEST_CASE("greedy search with FF solves the blocksworld fixtures") {
  for (const auto& [name, min_len] :
       std::vector<std::pair<std::string, size_t>>{{"easy", 4}, {"medium", 8}, {"hard", 12}}) {
    CAPTURE(name);
    Instance in = load("blocksworld", name);
    auto start = std::chrono::steady_clock::now();
    PlanResult r = solve(in.domain, in.problem);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(r.outcome == Outcome::Solved);
    CHECK(r.plan->steps.size() >= min_len);
    CHECK(secs < 10.0);
    PlanCheck check = validate_plan(in.domain, in.problem, *r.plan);
    CHECK(check.valid);
    CHECK(check.cost == r.plan->cost);
  }
}

TEST_CASE("uniform-cost and breadth-first match the oracle optimum") {
  for (const auto& [family, name] : kSolvable) {
    CAPTURE(family);
    CAPTURE(name);
    Instance in = load(family, name);
    testing::OracleOptimum opt = testing::oracle_optimum(in.domain, in.problem, 100000);
    if (!opt.exhausted) continue;
    REQUIRE(opt.cost.has_value());

    PlannerOptions ucs;
    ucs.search.algorithm = Algorithm::UniformCost;
    PlanResult r = solve(in.domain, in.problem, ucs);
    REQUIRE(r.outcome == Outcome::Solved);
    CHECK(r.plan->cost == *opt.cost);
    CHECK(validate_plan(in.domain, in.problem, *r.plan).valid);

    PlannerOptions bfs;
    bfs.search.algorithm = Algorithm::BreadthFirst;
    PlanResult b = solve(in.domain, in.problem, bfs);
    REQUIRE(b.outcome == Outcome::Solved);
    CHECK(static_cast<long>(b.plan->steps.size()) == *opt.length);
  }
}

TEST_CASE("every algorithm and heuristic produces valid plans") {
  for (const auto& [family, name] : kSolvable) {
    for (Algorithm alg : {Algorithm::GreedyBestFirst, Algorithm::AStar}) {
      for (HeuristicKind h : {HeuristicKind::FF, HeuristicKind::GoalCount,
                              HeuristicKind::Blind}) {
        CAPTURE(family);
        CAPTURE(name);
        CAPTURE(to_string(alg));
        CAPTURE(to_string(h));
        Instance in = load(family, name);
        PlannerOptions opts;
        opts.search.algorithm = alg;
        opts.search.heuristic = h;
        PlanResult r = solve(in.domain, in.problem, opts);
        REQUIRE(r.outcome == Outcome::Solved);
        PlanCheck check = validate_plan(in.domain, in.problem, *r.plan);
        CHECK(check.valid);
        CHECK(check.cost == r.plan->cost);
      }
    }
  }
}

TEST_CASE("contradictory goal is unsolvable") {
  Instance in = load("blocksworld", "unsolvable");
  for (Algorithm alg : {Algorithm::GreedyBestFirst, Algorithm::AStar,
                        Algorithm::UniformCost, Algorithm::BreadthFirst}) {
    PlannerOptions opts;
    opts.search.algorithm = alg;
    auto start = std::chrono::steady_clock::now();
    PlanResult r = solve(in.domain, in.problem, opts);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.outcome == Outcome::Unsolvable);
    CHECK_FALSE(r.plan.has_value());
    CHECK(secs < 5.0);
  }
  testing::OracleOptimum opt = testing::oracle_optimum(in.domain, in.problem, 100000);
  CHECK(opt.exhausted);
  CHECK_FALSE(opt.length.has_value());
}

TEST_CASE("FF on the Sussman anomaly") {
  Instance in = load("blocksworld", "sussman");
  // h+ from the delete-free breadth-first oracle.
  auto hplus = testing::oracle_relaxed_length(in.domain, in.problem,
                                              testing::initial_atoms(in.problem));
  REQUIRE(hplus.has_value());
  CHECK(*hplus == 5);
  GroundTask task = ground(in.domain, in.problem);
  FFHeuristic ff(task);
  long h = ff.evaluate(task.init);
  CHECK(h >= *hplus);
  CHECK(h == 5);
  CHECK(ff.relaxed_plan().size() == 5);
}

TEST_CASE("heuristics are zero exactly on goal states") {
  for (const auto& [family, name] : kSolvable) {
    CAPTURE(family);
    CAPTURE(name);
    Instance in = load(family, name);
    GroundTask task = ground(in.domain, in.problem);
    PlannerOptions opts;
    opts.search.algorithm = Algorithm::BreadthFirst;
    SearchResult r = search(task, opts.search);
    REQUIRE(r.outcome == Outcome::Solved);
    State s = task.init;
    std::vector<State> trace = {s};
    for (size_t a : r.plan) {
      s = task.successor(s, task.actions[a]);
      trace.push_back(s);
    }
    for (HeuristicKind kind : {HeuristicKind::FF, HeuristicKind::GoalCount,
                               HeuristicKind::Blind}) {
      auto h = make_heuristic(kind, task);
      for (const auto& st : trace) {
        long v = h->evaluate(st);
        if (task.is_goal(st)) {
          CHECK(v == 0);
        } else {
          CHECK(v >= 1);
          CHECK(v != kDeadEnd);
        }
      }
    }
  }
}

TEST_CASE("FF detects relaxed dead ends") {
  Instance in = load("blocksworld", "unsolvable");
  GroundTask task = ground(in.domain, in.problem);
  // The goal is reachable in the relaxation, so FF is finite here.
  CHECK(FFHeuristic(task).evaluate(task.init) != kDeadEnd);

  pddl::DomainSpec d = pddl::parse_domain(
      "(define (domain d) (:predicates (p) (q))"
      " (:action a :parameters () :precondition (q) :effect (p)))");
  pddl::ProblemSpec p = pddl::parse_problem(
      "(define (problem x) (:domain d) (:objects) (:init) (:goal (p)))", d);
  GroundTask t2 = ground(d, p);
  CHECK(FFHeuristic(t2).evaluate(t2.init) == kDeadEnd);
  CHECK(solve(d, p).outcome == Outcome::Unsolvable);
}

TEST_CASE("ground successors agree with the lifted oracle on random walks") {
  std::mt19937 rng(20240611);
  int sequences = 0;
  while (sequences < 1000) {
    for (const auto& [family, name] : kSolvable) {
      if (sequences >= 1000) break;
      Instance in = load(family, name);
      GroundTask task = ground(in.domain, in.problem);
      State s = task.init;
      testing::AtomSet lifted = testing::initial_atoms(in.problem);
      REQUIRE(to_atoms(task, s, in.problem, in.domain) == lifted);
      for (int depth = 0; depth < 15; ++depth) {
        auto succ = testing::oracle_successors(in.domain, in.problem, lifted);
        std::vector<size_t> applicable;
        for (size_t a = 0; a < task.actions.size(); ++a) {
          if (task.applicable(task.actions[a], s)) applicable.push_back(a);
        }
        // Disjunctive preconditions may yield several ground copies of one
        // step, so compare the sets of distinct steps.
        std::set<std::string> gk, lk;
        for (size_t a : applicable) {
          gk.insert(step_key({task.actions[a].name, task.actions[a].args}));
        }
        for (const auto& o : succ) lk.insert(step_key(o.step));
        REQUIRE(gk == lk);
        if (applicable.empty()) break;
        size_t pick = applicable[rng() % applicable.size()];
        const GroundAction& ga = task.actions[pick];
        s = task.successor(s, ga);
        for (const auto& o : succ) {
          if (o.step.action == ga.name && o.step.args == ga.args) {
            lifted = o.next;
            break;
          }
        }
        REQUIRE(to_atoms(task, s, in.problem, in.domain) == lifted);
        CHECK(task.is_goal(s) == testing::oracle_goal(in.domain, in.problem, lifted));
      }
      ++sequences;
    }
  }
  CHECK(sequences == 1000);
}

TEST_CASE("conditional effects read the state before the action") {
  Instance in = load("adl", "problem");
  GroundTask task = ground(in.domain, in.problem);
  pddl::Plan plan;
  plan.steps = {{"flip", {"s1", "hall"}}, {"flip", {"s1", "hall"}}};
  plan.cost = 2;
  // Flipping twice restores every lamp.
  PlanCheck check = validate_plan(in.domain, in.problem, plan);
  CHECK(check.steps_applied == 2);
  State s = task.init;
  for (const auto& step : plan.steps) {
    for (const auto& a : task.actions) {
      if (a.name == step.action && a.args == step.args && task.applicable(a, s)) {
        s = task.successor(s, a);
        break;
      }
    }
  }
  CHECK(s == task.init);
}

TEST_CASE("plan validation reports the failing step") {
  Instance in = load("blocksworld", "easy");
  pddl::Plan bad = pddl::parse_plan("(pick-up a)\n");
  PlanCheck check = validate_plan(in.domain, in.problem, bad);
  CHECK_FALSE(check.valid);
  CHECK(check.steps_applied == 0);
  CHECK(check.error.find("step 1") != std::string::npos);

  PlanCheck unknown = validate_plan(in.domain, in.problem, pddl::parse_plan("(fly a)"));
  CHECK(unknown.error.find("unknown action") != std::string::npos);

  PlanCheck short_plan =
      validate_plan(in.domain, in.problem, pddl::parse_plan("(unstack b a)\n(put-down b)"));
  CHECK(short_plan.steps_applied == 2);
  CHECK_FALSE(short_plan.goal_reached);
}

TEST_CASE("resource limits are reported") {
  Instance in = load("blocksworld", "hard");
  PlannerOptions tight;
  tight.search.algorithm = Algorithm::BreadthFirst;
  tight.search.max_expansions = 10;
  PlanResult r = solve(in.domain, in.problem, tight);
  CHECK(r.outcome == Outcome::ResourceLimit);
  CHECK(r.detail.find("expansion") != std::string::npos);

  PlannerOptions ground_cap;
  ground_cap.grounding.max_ground_actions = 5;
  PlanResult g = solve(in.domain, in.problem, ground_cap);
  CHECK(g.outcome == Outcome::ResourceLimit);
  CHECK(to_string(g.outcome) == "resource-limit");
}

TEST_CASE("empty goal gives the empty plan") {
  Instance in = load("empty", "problem");
  PlanResult r = solve(in.domain, in.problem);
  REQUIRE(r.outcome == Outcome::Solved);
  CHECK(r.plan->steps.empty());
  CHECK(r.plan->cost == 0);
}

TEST_CASE("action costs default to one without a cost function") {
  Instance bw = load("blocksworld", "easy");
  GroundTask t = ground(bw.domain, bw.problem);
  CHECK(t.unit_cost);
  for (const auto& a : t.actions) CHECK(a.cost == 1);
  Instance lg = load("logistics", "problem");
  GroundTask t2 = ground(lg.domain, lg.problem);
  CHECK_FALSE(t2.unit_cost);
  for (const auto& a : t2.actions) {
    if (a.name == "fly-airplane") CHECK(a.cost == 5);
    if (a.name == "drive-truck") CHECK(a.cost == 2);
  }
}

TEST_CASE("algorithm and heuristic names") {
  for (Algorithm a : {Algorithm::GreedyBestFirst, Algorithm::AStar,
                      Algorithm::UniformCost, Algorithm::BreadthFirst}) {
    CHECK(algorithm_from_string(to_string(a)) == a);
  }
  CHECK(heuristic_from_string("ff") == HeuristicKind::FF);
  CHECK_FALSE(algorithm_from_string("dfs").has_value());
}
