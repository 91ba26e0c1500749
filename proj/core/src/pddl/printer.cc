#include "nl2plan/pddl/printer.h"

#include <cctype>
#include <sstream>

namespace nl2plan::pddl {

namespace {

std::string pad(int n) { return std::string(static_cast<size_t>(n), ' '); }

void append_comment(std::ostream& os, const std::string& description) {
  std::string text = single_line(description);
  if (!text.empty()) os << " ; " << text;
}

bool is_compact(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Equal:
      return true;
    case Formula::Kind::Not:
      return is_compact(f.children.front()) &&
             f.children.front().kind != Formula::Kind::And &&
             f.children.front().kind != Formula::Kind::Or;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return f.children.empty();
    default:
      return false;
  }
}

bool is_compact(const Effect& e) {
  switch (e.kind) {
    case Effect::Kind::Literal:
    case Effect::Kind::IncreaseCost:
    case Effect::Kind::Malformed:
      return true;
    case Effect::Kind::And:
      return e.children.empty();
    default:
      return false;
  }
}

const char* connective(Formula::Kind kind) {
  switch (kind) {
    case Formula::Kind::And: return "and";
    case Formula::Kind::Or: return "or";
    case Formula::Kind::Not: return "not";
    case Formula::Kind::Imply: return "imply";
    case Formula::Kind::Forall: return "forall";
    case Formula::Kind::Exists: return "exists";
    default: return "";
  }
}

// Writes `f` starting at the current position. Nested parts go on their own
// lines indented by `indent + 2`; the closing paren sits at `indent`.
void write_formula(std::ostream& os, const Formula& f, int indent) {
  if (is_compact(f)) {
    os << print_formula(f);
    return;
  }
  os << '(' << connective(f.kind);
  if (f.kind == Formula::Kind::Forall || f.kind == Formula::Kind::Exists) {
    os << " (" << print_typed_list(f.vars) << ')';
  }
  for (const auto& child : f.children) {
    os << '\n' << pad(indent + 2);
    write_formula(os, child, indent + 2);
  }
  os << '\n' << pad(indent) << ')';
}

void write_effect(std::ostream& os, const Effect& e, int indent) {
  if (is_compact(e)) {
    os << print_effect(e);
    return;
  }
  switch (e.kind) {
    case Effect::Kind::And:
      os << "(and";
      break;
    case Effect::Kind::Forall:
      os << "(forall (" << print_typed_list(e.vars) << ')';
      break;
    case Effect::Kind::When:
      os << "(when\n" << pad(indent + 2);
      write_formula(os, e.condition, indent + 2);
      break;
    default:
      break;
  }
  for (const auto& child : e.children) {
    os << '\n' << pad(indent + 2);
    write_effect(os, child, indent + 2);
  }
  os << '\n' << pad(indent) << ')';
}

}  // namespace

std::string single_line(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string print_atom(const Atom& atom) {
  std::string out = "(" + atom.predicate;
  for (const auto& a : atom.args) out += " " + a;
  return out + ")";
}

std::string print_typed_list(const TypedList& list) {
  std::string out;
  for (size_t i = 0; i < list.size(); ++i) {
    if (i > 0) out += ' ';
    out += list[i].name;
    std::string type = list[i].type;
    if (type.empty()) {
      // An untyped name followed by typed ones would inherit their type.
      bool typed_after = false;
      for (size_t k = i + 1; k < list.size(); ++k) {
        typed_after = typed_after || !list[k].type.empty();
      }
      if (typed_after) type = std::string(kRootType);
    }
    if (!type.empty()) out += " - " + type;
  }
  return out;
}

std::string print_formula(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      return print_atom(f.atom);
    case Formula::Kind::Equal:
      return "(= " + f.atom.args.at(0) + " " + f.atom.args.at(1) + ")";
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return std::string("(") + connective(f.kind) + " (" +
             print_typed_list(f.vars) + ") " + print_formula(f.children.at(0)) +
             ")";
    default: {
      std::string out = std::string("(") + connective(f.kind);
      for (const auto& c : f.children) out += " " + print_formula(c);
      return out + ")";
    }
  }
}

std::string print_effect(const Effect& e) {
  switch (e.kind) {
    case Effect::Kind::Literal:
      return e.negated ? "(not " + print_atom(e.atom) + ")" : print_atom(e.atom);
    case Effect::Kind::IncreaseCost:
      return "(increase (total-cost) " + std::to_string(e.amount) + ")";
    case Effect::Kind::Malformed:
      return e.raw;
    case Effect::Kind::Forall:
      return "(forall (" + print_typed_list(e.vars) + ") " +
             print_effect(e.children.at(0)) + ")";
    case Effect::Kind::When:
      return "(when " + print_formula(e.condition) + " " +
             print_effect(e.children.at(0)) + ")";
    case Effect::Kind::And: {
      std::string out = "(and";
      for (const auto& c : e.children) out += " " + print_effect(c);
      return out + ")";
    }
  }
  return {};
}

std::string print_predicate(const PredicateDecl& p) {
  std::string params = print_typed_list(p.params);
  return "(" + p.name + (params.empty() ? "" : " " + params) + ")";
}

std::string print_domain(const DomainSpec& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  os << "  (:requirements";
  for (const auto& r : DomainSpec::requirements()) os << ' ' << r;
  os << ")\n";
  if (!d.hierarchy.empty()) {
    os << "  (:types\n";
    for (const auto& t : d.hierarchy.types()) {
      os << "    " << t << " - " << d.hierarchy.parent_of(t);
      append_comment(os, d.hierarchy.description_of(t));
      os << '\n';
    }
    os << "  )\n";
  }
  if (!d.predicates.empty()) {
    os << "  (:predicates\n";
    for (const auto& p : d.predicates) {
      os << "    " << print_predicate(p);
      append_comment(os, p.description);
      os << '\n';
    }
    os << "  )\n";
  }
  if (d.uses_action_costs()) {
    os << "  (:functions\n    (total-cost) - number\n  )\n";
  }
  for (const auto& a : d.actions) {
    os << "\n  (:action " << a.name;
    append_comment(os, a.description);
    os << "\n    :parameters (" << print_typed_list(a.params) << ")\n";
    os << "    :precondition ";
    write_formula(os, a.precondition, 4);
    os << "\n    :effect ";
    write_effect(os, a.effect, 4);
    os << "\n  )\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_problem(const ProblemSpec& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  if (!p.domain_name.empty()) os << "  (:domain " << p.domain_name << ")\n";
  if (p.objects.empty()) {
    os << "  (:objects)\n";
  } else {
    os << "  (:objects\n";
    for (const auto& o : p.objects) {
      os << "    " << print_typed_list({o}) << '\n';
    }
    os << "  )\n";
  }
  if (p.init.empty() && !p.initial_cost) {
    os << "  (:init)\n";
  } else {
    os << "  (:init\n";
    for (const auto& a : p.init) os << "    " << print_atom(a) << '\n';
    if (p.initial_cost) {
      os << "    (= (total-cost) " << *p.initial_cost << ")\n";
    }
    os << "  )\n";
  }
  os << "  (:goal ";
  write_formula(os, p.goal, 2);
  os << ")\n";
  if (p.initial_cost) os << "  (:metric minimize (total-cost))\n";
  os << ")\n";
  return os.str();
}

std::string print_action_block(const ActionDraft& draft) {
  std::ostringstream os;
  os << ":parameters (" << print_typed_list(draft.action.params) << ")\n";
  os << ":precondition ";
  write_formula(os, draft.action.precondition, 0);
  os << "\n:effect ";
  write_effect(os, draft.action.effect, 0);
  os << '\n';
  if (!draft.new_predicates.empty()) {
    os << ":new-predicates\n";
    for (const auto& p : draft.new_predicates) {
      os << print_predicate(p);
      append_comment(os, p.description);
      os << '\n';
    }
  }
  return os.str();
}

std::string print_task_block(const TaskDraft& draft) {
  std::ostringstream os;
  os << "(:objects\n";
  for (const auto& o : draft.objects) os << "  " << print_typed_list({o}) << '\n';
  os << ")\n(:init\n";
  for (const auto& f : draft.init) os << "  " << print_formula(f) << '\n';
  if (draft.initial_cost) {
    os << "  (= (total-cost) " << *draft.initial_cost << ")\n";
  }
  os << ")\n(:goal ";
  write_formula(os, draft.goal, 0);
  os << ")\n";
  return os.str();
}

std::string print_plan(const Plan& plan) {
  std::string out;
  for (const auto& s : plan.steps) {
    out += "(" + s.action;
    for (const auto& a : s.args) out += " " + a;
    out += ")\n";
  }
  out += "; cost = " + std::to_string(plan.cost) + "\n";
  return out;
}

}  // namespace nl2plan::pddl
