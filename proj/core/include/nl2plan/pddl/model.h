#ifndef NL2PLAN_PDDL_MODEL_H
#define NL2PLAN_PDDL_MODEL_H

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nl2plan::pddl {

inline constexpr std::string_view kRootType = "object";

class UnknownTypeError : public std::invalid_argument {
 public:
  explicit UnknownTypeError(const std::string& type)
      : std::invalid_argument("undeclared type '" + type + "'") {}
};

// Single-parent type tree rooted at the implicit "object" type. Names are
// stored lowercased. Parents may be referenced before they are added, so a
// hierarchy under construction can be temporarily invalid; tree_error()
// reports that state.
class TypeHierarchy {
 public:
  // Throws std::invalid_argument for a bad identifier or a duplicate name.
  void add(std::string_view name, std::string_view parent = kRootType,
           std::string_view description = {});
  void set_parent(std::string_view name, std::string_view parent);
  void set_description(std::string_view name, std::string_view description);
  void remove(std::string_view name);

  // True for declared types and for "object".
  bool contains(std::string_view name) const;
  const std::string& parent_of(std::string_view name) const;
  const std::string& description_of(std::string_view name) const;
  std::vector<std::string> children_of(std::string_view name) const;
  // Declared types in insertion order; "object" is never listed.
  const std::vector<std::string>& types() const { return order_; }
  bool empty() const { return order_.empty(); }

  // Reflexive. Throws UnknownTypeError if either type is undeclared.
  bool is_subtype(std::string_view sub, std::string_view sup) const;

  // Describes the first cycle or dangling parent, if any.
  std::optional<std::string> tree_error() const;

  bool operator==(const TypeHierarchy&) const = default;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string, std::less<>> parent_;
  std::map<std::string, std::string, std::less<>> description_;
};

bool is_subtype(const TypeHierarchy& hierarchy, std::string_view sub,
                std::string_view sup);

struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;
};

inline bool is_variable(std::string_view term) {
  return !term.empty() && term.front() == '?';
}

// A variable or object with its type. An empty type means the source left it
// unspecified; strict parsing replaces that with "object".
struct TypedName {
  std::string name;
  std::string type;

  bool operator==(const TypedName&) const = default;
};
using TypedList = std::vector<TypedName>;

struct Formula {
  enum class Kind { Atom, Equal, Not, And, Or, Imply, Forall, Exists };

  Kind kind = Kind::And;
  Atom atom;  // Atom; Equal keeps its two terms in atom.args
  std::vector<Formula> children;
  TypedList vars;  // Forall / Exists

  static Formula make_atom(Atom a);
  static Formula make_equal(std::string lhs, std::string rhs);
  static Formula make_not(Formula f);
  static Formula make_and(std::vector<Formula> fs = {});
  static Formula make_or(std::vector<Formula> fs);
  static Formula make_imply(Formula lhs, Formula rhs);
  static Formula make_forall(TypedList vars, Formula body);
  static Formula make_exists(TypedList vars, Formula body);

  bool is_empty_and() const { return kind == Kind::And && children.empty(); }

  bool operator==(const Formula&) const = default;
};

struct Effect {
  // Malformed keeps effect syntax outside the supported grammar (e.g. an
  // `or` inside an effect) so drafts can be reported on instead of rejected.
  enum class Kind { Literal, And, Forall, When, IncreaseCost, Malformed };

  Kind kind = Kind::And;
  Atom atom;
  bool negated = false;
  std::vector<Effect> children;
  TypedList vars;
  Formula condition;
  long amount = 0;
  std::string malformed_keyword;
  std::string raw;

  static Effect make_literal(Atom a, bool negated = false);
  static Effect make_and(std::vector<Effect> es = {});
  static Effect make_forall(TypedList vars, Effect body);
  static Effect make_when(Formula condition, Effect body);
  static Effect make_increase(long amount);

  bool operator==(const Effect&) const = default;
};

struct PredicateDecl {
  std::string name;
  TypedList params;
  std::string description;

  bool same_signature(const PredicateDecl& other) const;
  bool operator==(const PredicateDecl&) const = default;
};

struct ActionSchema {
  std::string name;
  TypedList params;
  Formula precondition;
  Effect effect;
  std::string description;

  bool operator==(const ActionSchema&) const = default;
};

struct DomainSpec {
  std::string name;
  TypeHierarchy hierarchy;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  // Emitted on every printed domain regardless of features used.
  static const std::vector<std::string>& requirements();

  const PredicateDecl* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool uses_action_costs() const;

  bool operator==(const DomainSpec&) const = default;
};

struct ProblemSpec {
  std::string name;
  std::string domain_name;
  TypedList objects;
  std::vector<Atom> init;
  std::optional<long> initial_cost;
  Formula goal;

  const TypedName* find_object(std::string_view name) const;

  bool operator==(const ProblemSpec&) const = default;
};

struct PlanStep {
  std::string action;
  std::vector<std::string> args;

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  long cost = 0;

  bool operator==(const Plan&) const = default;
};

// Problems with the section layout of an LLM-drafted action, such as an
// unknown `:preconditions` keyword. Kept for the validator to report.
struct SectionIssue {
  std::string keyword;
  std::string detail;

  bool operator==(const SectionIssue&) const = default;
};

// An action as drafted by the LLM, before validation. May violate any of the
// ActionSchema invariants.
struct ActionDraft {
  ActionSchema action;
  std::vector<PredicateDecl> new_predicates;
  std::vector<SectionIssue> section_issues;

  bool operator==(const ActionDraft&) const = default;
};

// Objects, initial state and goal as drafted by the LLM. The initial state
// is kept as formulas so that disallowed entries such as negations survive
// until validation.
struct TaskDraft {
  TypedList objects;
  std::vector<Formula> init;
  std::optional<long> initial_cost;
  Formula goal;

  bool operator==(const TaskDraft&) const = default;
};

// Words that may not be used as type, predicate, action or object names.
bool is_reserved_word(std::string_view name);

}  // namespace nl2plan::pddl

#endif
