#include "validator_fixtures.h"

#include <algorithm>
#include <stdexcept>

#include "nl2plan/pddl/parser.h"
#include "test_support.h"

namespace nl2plan::testing {

using pddl::ActionDraft;
using pddl::Effect;
using pddl::Formula;
using pddl::TaskDraft;
using validate::Category;
using validate::IssueCode;

namespace {

Effect effect_of(const std::string& text) {
  return pddl::parse_action_draft(":effect " + text, "x").action.effect;
}

void drop_last_pre(ActionDraft& d) { d.action.precondition.children.pop_back(); }
void drop_last_eff(ActionDraft& d) { d.action.effect.children.pop_back(); }
void add_pre(ActionDraft& d, const std::string& text) {
  d.action.precondition.children.push_back(pddl::parse_formula(text));
}

void drop_object(TaskDraft& d, const std::string& name) {
  auto& o = d.objects;
  for (auto it = o.rbegin(); it != o.rend(); ++it) {
    if (it->name == name) {
      o.erase(std::next(it).base());
      return;
    }
  }
}

}  // namespace

pddl::DomainSpec validator_context() {
  pddl::DomainSpec d = pddl::parse_domain(
      read_file(data_path("pddl/blocksworld-domain.pddl")));
  d.hierarchy.add("gripper", "object", "A robot hand.");
  d.predicates.push_back({"free", {{"?g", "gripper"}}, "?g holds nothing."});
  d.actions.erase(std::remove_if(d.actions.begin(), d.actions.end(),
                                 [](const auto& a) { return a.name == "stack"; }),
                  d.actions.end());
  return d;
}

ActionDraft valid_action() {
  return pddl::parse_action_draft(
      ":parameters (?b1 - block ?b2 - block)\n"
      ":precondition (and (holding ?b1) (clear ?b2) (not (= ?b1 ?b2)))\n"
      ":effect (and (on ?b1 ?b2) (clear ?b1) (arm-empty) (not (holding ?b1))"
      " (not (clear ?b2)))\n",
      "stack");
}

TaskDraft valid_task() {
  return pddl::parse_task_draft(
      "(:objects a b - block g1 - gripper)\n"
      "(:init (on-table a) (on b a) (clear b) (arm-empty) (free g1))\n"
      "(:goal (and (on a b)))\n");
}

Category category_of_action_code(IssueCode code) {
  switch (code) {
    case IssueCode::UnknownKeyword:
    case IssueCode::MisplacedKeyword: return Category::Keywords;
    case IssueCode::MissingType:
    case IssueCode::UnknownType: return Category::Types;
    case IssueCode::UndefinedPredicate: return Category::Predicates;
    case IssueCode::ArityMismatch:
    case IssueCode::ArgumentTypeMismatch: return Category::Arity;
    case IssueCode::UnboundVariable:
    case IssueCode::ConstantInAction:
    case IssueCode::DuplicateVariable: return Category::Binding;
    case IssueCode::ConflictingPredicate: return Category::Conflicts;
    case IssueCode::InvalidEffectConnective:
    case IssueCode::NegatedNonAtom:
    case IssueCode::InvalidCostIncrease: return Category::EffectGrammar;
    case IssueCode::ReservedName:
    case IssueCode::NameCollision:
    case IssueCode::InvalidIdentifier: return Category::Names;
    default: throw std::invalid_argument("not an action issue code");
  }
}

std::vector<Fault<ActionDraft>> action_faults() {
  using F = Fault<ActionDraft>;
  auto make = [](std::string name, IssueCode code, auto inject, auto fix) {
    return F{std::move(name), code, category_of_action_code(code), inject, fix};
  };
  return {
      make("unknown section", IssueCode::UnknownKeyword,
           [](ActionDraft& d) {
             d.section_issues.push_back({":preconditions", "unknown section keyword"});
           },
           [](ActionDraft& d) { d.section_issues.clear(); }),
      make("keyword as predicate", IssueCode::MisplacedKeyword,
           [](ActionDraft& d) { add_pre(d, "(either ?b1)"); }, drop_last_pre),
      make("untyped parameter", IssueCode::MissingType,
           [](ActionDraft& d) { d.action.params[1].type.clear(); },
           [](ActionDraft& d) { d.action.params[1].type = "block"; }),
      make("undeclared parameter type", IssueCode::UnknownType,
           [](ActionDraft& d) { d.action.params[0].type = "cube"; },
           [](ActionDraft& d) { d.action.params[0].type = "block"; }),
      make("undefined predicate", IssueCode::UndefinedPredicate,
           [](ActionDraft& d) {
             d.action.effect.children.push_back(
                 Effect::make_literal({"glued", {"?b1", "?b2"}}));
           },
           [](ActionDraft& d) {
             d.new_predicates.push_back(
                 {"glued", {{"?x", "block"}, {"?y", "block"}}, "?x is glued to ?y"});
           }),
      make("wrong arity", IssueCode::ArityMismatch,
           [](ActionDraft& d) {
             d.action.precondition.children[0].atom.args.push_back("?b2");
           },
           [](ActionDraft& d) { d.action.precondition.children[0].atom.args.pop_back(); }),
      make("wrong argument type", IssueCode::ArgumentTypeMismatch,
           [](ActionDraft& d) {
             d.action.params.push_back({"?g", "gripper"});
             add_pre(d, "(on-table ?g)");
           },
           [](ActionDraft& d) {
             d.action.precondition.children.back() = pddl::parse_formula("(free ?g)");
           }),
      make("unbound variable", IssueCode::UnboundVariable,
           [](ActionDraft& d) { add_pre(d, "(on-table ?zz)"); },
           [](ActionDraft& d) { d.action.params.push_back({"?zz", "block"}); }),
      make("object constant", IssueCode::ConstantInAction,
           [](ActionDraft& d) { add_pre(d, "(on-table table1)"); },
           [](ActionDraft& d) {
             d.action.precondition.children.back().atom.args[0] = "?t";
             d.action.params.push_back({"?t", "block"});
           }),
      make("duplicate parameter", IssueCode::DuplicateVariable,
           [](ActionDraft& d) { d.action.params.push_back({"?b1", "block"}); },
           [](ActionDraft& d) { d.action.params.pop_back(); }),
      make("conflicting redeclaration", IssueCode::ConflictingPredicate,
           [](ActionDraft& d) {
             d.new_predicates.push_back({"on", {{"?x", "block"}}, ""});
           },
           [](ActionDraft& d) { d.new_predicates.pop_back(); }),
      make("disjunctive effect", IssueCode::InvalidEffectConnective,
           [](ActionDraft& d) {
             d.action.effect.children.push_back(effect_of("(or (clear ?b1) (arm-empty))"));
           },
           drop_last_eff),
      make("negated conjunction", IssueCode::NegatedNonAtom,
           [](ActionDraft& d) {
             d.action.effect.children.push_back(effect_of("(not (and (clear ?b1)))"));
           },
           [](ActionDraft& d) {
             d.action.effect.children.back() =
                 Effect::make_literal({"clear", {"?b1"}}, true);
           }),
      make("negative cost", IssueCode::InvalidCostIncrease,
           [](ActionDraft& d) {
             d.action.effect.children.push_back(effect_of("(increase (total-cost) -1)"));
           },
           [](ActionDraft& d) { d.action.effect.children.back() = Effect::make_increase(1); }),
      make("reserved action name", IssueCode::ReservedName,
           [](ActionDraft& d) { d.action.name = "exists"; },
           [](ActionDraft& d) { d.action.name = "stack"; }),
      make("duplicate action name", IssueCode::NameCollision,
           [](ActionDraft& d) { d.action.name = "pick-up"; },
           [](ActionDraft& d) { d.action.name = "stack"; }),
      make("malformed action name", IssueCode::InvalidIdentifier,
           [](ActionDraft& d) { d.action.name = "2stack"; },
           [](ActionDraft& d) { d.action.name = "stack"; }),
  };
}

std::vector<Fault<TaskDraft>> task_faults() {
  using F = Fault<TaskDraft>;
  auto init = [](const std::string& text) {
    return [text](TaskDraft& d) { d.init.push_back(pddl::parse_formula(text)); };
  };
  auto pop_init = [](TaskDraft& d) { d.init.pop_back(); };
  auto goal = [](const std::string& text) {
    return [text](TaskDraft& d) {
      d.goal.children.push_back(pddl::parse_formula(text));
    };
  };
  auto pop_goal = [](TaskDraft& d) { d.goal.children.pop_back(); };
  return {
      F{"duplicate object", IssueCode::DuplicateObject, Category::Objects,
        [](TaskDraft& d) { d.objects.push_back({"a", "block"}); },
        [](TaskDraft& d) { d.objects.pop_back(); }},
      F{"object named like a type", IssueCode::ObjectShadowsType, Category::Objects,
        [](TaskDraft& d) { d.objects.push_back({"block", "block"}); },
        [](TaskDraft& d) { d.objects.back().name = "block1"; }},
      F{"undeclared object type", IssueCode::UnknownObjectType, Category::Objects,
        [](TaskDraft& d) { d.objects.push_back({"c", "sphere"}); },
        [](TaskDraft& d) { d.objects.back().type = "block"; }},
      F{"task with a negated fact", IssueCode::NegationInInit, Category::Init,
        init("(not (on-table b))"), pop_init},
      F{"conjunction in init", IssueCode::InvalidInitEntry, Category::Init,
        init("(and (clear b))"), pop_init},
      F{"variable in init", IssueCode::VariableInInit, Category::Init,
        init("(clear ?x)"), pop_init},
      F{"unknown object in init", IssueCode::UndefinedObject, Category::Init,
        init("(clear zz)"), [](TaskDraft& d) { d.objects.push_back({"zz", "block"}); }},
      F{"undefined predicate in goal", IssueCode::UndefinedPredicate, Category::Goal,
        goal("(glued a b)"), pop_goal},
      F{"wrong arity in init", IssueCode::ArityMismatch, Category::Init,
        init("(on-table a b)"), pop_init},
      F{"wrong type in init", IssueCode::ArgumentTypeMismatch, Category::Init,
        init("(on-table g1)"), pop_init},
      F{"unbound goal variable", IssueCode::UnboundVariable, Category::Goal,
        goal("(on ?x b)"), pop_goal},
      F{"reserved object name", IssueCode::ReservedName, Category::Objects,
        [](TaskDraft& d) { d.objects.push_back({"forall", "block"}); },
        [](TaskDraft& d) { drop_object(d, "forall"); }},
      F{"malformed object name", IssueCode::InvalidIdentifier, Category::Objects,
        [](TaskDraft& d) { d.objects.push_back({"3c", "block"}); },
        [](TaskDraft& d) { d.objects.back().name = "c3"; }},
      F{"keyword in goal", IssueCode::MisplacedKeyword, Category::Goal,
        goal("(when a)"), pop_goal},
      F{"undeclared quantifier type", IssueCode::UnknownType, Category::Goal,
        goal("(exists (?s - sphere) (clear a))"), pop_goal},
  };
}

}  // namespace nl2plan::testing
