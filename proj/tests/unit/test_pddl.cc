#include <doctest.h>

#include <map>
#include <random>

#include "nl2plan/pddl/parser.h"
#include "nl2plan/pddl/printer.h"
#include "test_support.h"

using namespace nl2plan::pddl;
using nl2plan::testing::data_path;
using nl2plan::testing::read_file;

namespace {

DomainSpec load_domain(const std::string& name) {
  return parse_domain(read_file(data_path("pddl/" + name + "-domain.pddl")));
}

// Splits the corpus into domains and the problems that belong to them.
std::map<std::string, std::vector<std::string>> corpus_families() {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& path : nl2plan::testing::pddl_corpus()) {
    std::string stem = path.stem().string();
    std::string family = stem.substr(0, stem.find('-'));
    if (stem != family + "-domain") out[family].push_back(stem);
    else out[family];
  }
  return out;
}

}  // namespace

TEST_CASE("s-expressions keep positions and comments") {
  SExprDocument doc = read_sexprs("(A b ; first\n  (C))  ; second\n");
  REQUIRE(doc.exprs.size() == 1);
  const SExpr& e = doc.exprs[0];
  CHECK(e.items[0].symbol == "a");
  CHECK(e.items[2].items[0].symbol == "c");
  CHECK(e.items[2].pos.line == 2);
  CHECK(e.items[2].pos.column == 3);
  REQUIRE(doc.comment_on(1) != nullptr);
  CHECK(*doc.comment_on(1) == "first");
  CHECK(*doc.comment_on(2) == "second");
  CHECK(doc.comment_on(3) == nullptr);
}

TEST_CASE("unbalanced input reports line and column") {
  try {
    read_sexprs("(a\n  (b c)\n");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.pos().line == 1);
    CHECK(err.pos().column == 1);
  }
  CHECK_THROWS_AS(read_sexprs("(a))"), ParseError);
}

TEST_CASE("corpus has at least ten files") {
  CHECK(nl2plan::testing::pddl_corpus().size() >= 10);
}

TEST_CASE("every corpus file survives parse, print, parse") {
  for (const auto& [family, problems] : corpus_families()) {
    CAPTURE(family);
    const std::string domain_text =
        read_file(data_path("pddl/" + family + "-domain.pddl"));
    DomainSpec domain = parse_domain(domain_text);
    const std::string printed = print_domain(domain);
    DomainSpec reparsed = parse_domain(printed);
    CHECK(reparsed == domain);
    CHECK(print_domain(reparsed) == printed);
    for (const auto& stem : problems) {
      CAPTURE(stem);
      ProblemSpec problem =
          parse_problem(read_file(data_path("pddl/" + stem + ".pddl")), domain);
      const std::string p1 = print_problem(problem);
      ProblemSpec again = parse_problem(p1, reparsed);
      CHECK(again == problem);
      CHECK(print_problem(again) == p1);
    }
  }
}

TEST_CASE("descriptions are read from trailing comments") {
  DomainSpec d = load_domain("blocksworld");
  CHECK(d.hierarchy.description_of("block") ==
        "A cube that can sit on the table or on another block.");
  REQUIRE(d.find_predicate("on") != nullptr);
  CHECK(d.find_predicate("on")->description == "?b1 sits directly on top of ?b2.");
  REQUIRE(d.find_action("stack") != nullptr);
  CHECK(d.find_action("stack")->description ==
        "Place the held block on top of a clear block.");
}

TEST_CASE("printed domains carry the fixed requirement list") {
  DomainSpec d = load_domain("empty");
  std::string text = print_domain(d);
  for (const auto& r : DomainSpec::requirements()) {
    CHECK(text.find(r) != std::string::npos);
  }
  CHECK(text.find(":functions") == std::string::npos);
  CHECK(print_domain(load_domain("logistics")).find("(total-cost) - number") !=
        std::string::npos);
}

TEST_CASE("identifiers are lowercased") {
  DomainSpec d = parse_domain(
      "(define (domain Mixed) (:types Crate) (:predicates (Full ?C - Crate))"
      " (:action Fill :parameters (?C - Crate) :precondition (and)"
      " :effect (Full ?C)))");
  CHECK(d.name == "mixed");
  CHECK(d.hierarchy.contains("crate"));
  CHECK(d.find_action("fill") != nullptr);
  CHECK(d.find_action("fill")->effect.atom.args[0] == "?c");
}

TEST_CASE("strict parsing rejects invariant violations") {
  const std::string head =
      "(define (domain d) (:types t) (:predicates (p ?x - t) (q ?x - t ?y - t))";
  auto action = [&](const std::string& body) {
    return head + " (:action a " + body + "))";
  };
  CHECK_NOTHROW(parse_domain(action(
      ":parameters (?x - t) :precondition (p ?x) :effect (not (p ?x))")));
  CHECK_THROWS_AS(parse_domain(action(
                      ":parameters (?x - t) :precondition (r ?x) :effect (p ?x)")),
                  ParseError);
  CHECK_THROWS_AS(parse_domain(action(
                      ":parameters (?x - t) :precondition (q ?x) :effect (p ?x)")),
                  ParseError);
  CHECK_THROWS_AS(parse_domain(action(
                      ":parameters (?x - t) :precondition (p ?y) :effect (p ?x)")),
                  ParseError);
  CHECK_THROWS_AS(parse_domain(action(
                      ":parameters (?x - t) :precondition (p obj) :effect (p ?x)")),
                  ParseError);
  CHECK_THROWS_AS(parse_domain(action(
                      ":parameters (?x - u) :precondition (p ?x) :effect (p ?x)")),
                  ParseError);
  CHECK_THROWS_AS(
      parse_domain(action(":parameters (?x - t) :precondition (p ?x) "
                          ":effect (or (p ?x) (not (p ?x)))")),
      ParseError);
  CHECK_THROWS_AS(parse_domain("(define (domain d) (:types a - b b - a))"),
                  ParseError);
  CHECK_THROWS_AS(parse_domain("(define (domain d) (:constants c))"), ParseError);
}

TEST_CASE("lenient parsing keeps malformed effects") {
  const std::string text =
      "(define (domain d) (:predicates (p ?x))"
      " (:action a :parameters (?x) :precondition (and)"
      " :effect (and (or (p ?x) (p ?x)) (not (and (p ?x))) (increase (cost) 2))))";
  CHECK_THROWS_AS(parse_domain(text), ParseError);
  DomainSpec d = parse_domain(text, ParseMode::Lenient);
  const Effect& e = d.actions.at(0).effect;
  REQUIRE(e.children.size() == 3);
  CHECK(e.children[0].kind == Effect::Kind::Malformed);
  CHECK(e.children[0].malformed_keyword == "or");
  CHECK(e.children[1].malformed_keyword == "not");
  CHECK(e.children[2].malformed_keyword == "increase");
  CHECK(d.actions[0].params[0].type.empty());
  // Lenient output prints and re-reads to the same value.
  CHECK(parse_domain(print_domain(d), ParseMode::Lenient) == d);
}

TEST_CASE("problems are checked against their domain") {
  DomainSpec d = load_domain("blocksworld");
  const std::string ok =
      "(define (problem p) (:domain blocksworld) (:objects a - block)"
      " (:init (clear a)) (:goal (clear a)))";
  CHECK_NOTHROW(parse_problem(ok, d));
  CHECK_THROWS_AS(
      parse_problem("(define (problem p) (:domain blocksworld) (:objects a - block)"
                    " (:init (clear b)) (:goal (clear a)))",
                    d),
      ParseError);
  CHECK_THROWS_AS(
      parse_problem("(define (problem p) (:domain blocksworld) (:objects a - block)"
                    " (:init (not (clear a))) (:goal (clear a)))",
                    d),
      ParseError);
  CHECK_THROWS_AS(
      parse_problem("(define (problem p) (:domain other) (:objects a - block)"
                    " (:init) (:goal (clear a)))",
                    d),
      ParseError);
  CHECK_THROWS_AS(
      parse_problem("(define (problem p) (:domain blocksworld) (:objects block - block)"
                    " (:init) (:goal (and)))",
                    d),
      ParseError);
  ProblemSpec lenient = parse_problem(
      "(define (problem p) (:domain blocksworld) (:objects a - block)"
      " (:init (clear b)) (:goal (clear a)))",
      d, ParseMode::Lenient);
  CHECK(lenient.init.at(0).args.at(0) == "b");
}

TEST_CASE("action blocks round-trip") {
  const std::string text =
      ":parameters (?b - block ?c - block)\n"
      ":precondition (and (holding ?b) (clear ?c))\n"
      ":effect (and (on ?b ?c) (not (holding ?b)) (glued ?b ?c))\n"
      ":new-predicates\n"
      "(glued ?b - block ?c - block) ; ?b is glued to ?c\n";
  ActionDraft draft = parse_action_draft(text, "Stack-Glue");
  CHECK(draft.action.name == "stack-glue");
  REQUIRE(draft.new_predicates.size() == 1);
  CHECK(draft.new_predicates[0].description == "?b is glued to ?c");
  CHECK(draft.section_issues.empty());
  ActionDraft again = parse_action_draft(print_action_block(draft), "stack-glue");
  CHECK(again == draft);
}

TEST_CASE("action blocks record unknown and repeated sections") {
  ActionDraft draft = parse_action_draft(
      ":parameters (?b - block) :preconditions (clear ?b)"
      " :effect (clear ?b) :effect (holding ?b)",
      "a");
  REQUIRE(draft.section_issues.size() == 2);
  CHECK(draft.section_issues[0].keyword == ":preconditions");
  CHECK(draft.section_issues[1].keyword == ":effect");
  CHECK(draft.action.effect.atom.predicate == "clear");
  CHECK_THROWS_AS(parse_action_draft(":parameters (?b)", "a"), ParseError);
}

TEST_CASE("wrapped action blocks are unwrapped") {
  ActionDraft draft = parse_action_draft(
      "(:action pick :parameters (?b - block) :precondition (clear ?b)"
      " :effect (holding ?b))",
      "pick");
  CHECK(draft.action.params.size() == 1);
  CHECK(draft.action.precondition.kind == Formula::Kind::Atom);
}

TEST_CASE("task blocks round-trip") {
  const std::string text =
      "(:objects a b - block)\n"
      "(:init (on a b) (not (clear b)) (= (total-cost) 0))\n"
      "(:goal (and (on b a) (not (on a b))))\n";
  TaskDraft draft = parse_task_draft(text);
  CHECK(draft.objects.size() == 2);
  CHECK(draft.init.size() == 2);
  CHECK(draft.init[1].kind == Formula::Kind::Not);
  CHECK(draft.initial_cost == 0);
  CHECK(parse_task_draft(print_task_block(draft)) == draft);
  CHECK_THROWS_AS(parse_task_draft("(:objects a) (:init)"), ParseError);
}

TEST_CASE("plans round-trip and read step labels") {
  Plan plan = parse_plan("0: (pick-up A)\n1: (stack a b) ; note\n");
  REQUIRE(plan.steps.size() == 2);
  CHECK(plan.steps[0].action == "pick-up");
  CHECK(plan.steps[0].args == std::vector<std::string>{"a"});
  CHECK(plan.cost == 2);
  Plan costed = parse_plan(print_plan({plan.steps, 7}));
  CHECK(costed.cost == 7);
  CHECK(costed.steps == plan.steps);
  CHECK(parse_plan("").steps.empty());
}

TEST_CASE("reserved words and identifiers") {
  CHECK(is_reserved_word("forall"));
  CHECK(is_reserved_word("object"));
  CHECK_FALSE(is_reserved_word("block"));
  CHECK(is_identifier("on-table"));
  CHECK(is_identifier("reconfigure_set"));
  CHECK_FALSE(is_identifier("2fast"));
  CHECK_FALSE(is_identifier("a b"));
}

TEST_CASE("is_subtype matches the transitive closure of the parent relation") {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    const int n = 1 + static_cast<int>(rng() % 12);
    TypeHierarchy h;
    std::vector<std::string> names = {"object"};
    std::vector<int> parent = {-1};
    for (int i = 1; i <= n; ++i) {
      int p = static_cast<int>(rng() % static_cast<unsigned>(i));
      names.push_back("t" + std::to_string(i));
      parent.push_back(p);
      h.add(names.back(), names[static_cast<size_t>(p)]);
    }
    // Reachability by Floyd-Warshall over the child->parent edges.
    const size_t m = names.size();
    std::vector<std::vector<bool>> reach(m, std::vector<bool>(m, false));
    for (size_t i = 0; i < m; ++i) {
      reach[i][i] = true;
      if (parent[i] >= 0) reach[i][static_cast<size_t>(parent[i])] = true;
    }
    for (size_t k = 0; k < m; ++k)
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < m; ++j) {
        CHECK(h.is_subtype(names[i], names[j]) == reach[i][j]);
      }
    }
    CHECK_FALSE(h.tree_error().has_value());
  }
}

TEST_CASE("type hierarchy errors") {
  TypeHierarchy h;
  h.add("vehicle");
  h.add("truck", "vehicle");
  CHECK_THROWS_AS(h.is_subtype("truck", "boat"), UnknownTypeError);
  CHECK_THROWS_AS(h.add("truck"), std::invalid_argument);
  h.add("car", "van");
  CHECK(h.tree_error().has_value());
  h.set_parent("car", "vehicle");
  CHECK_FALSE(h.tree_error().has_value());
  h.set_parent("vehicle", "car");
  CHECK(h.tree_error().has_value());
}
