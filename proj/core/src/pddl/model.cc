#include "nl2plan/pddl/model.h"

#include <algorithm>
#include <array>
#include <set>

#include "nl2plan/pddl/sexpr.h"

namespace nl2plan::pddl {

void TypeHierarchy::add(std::string_view name, std::string_view parent,
                        std::string_view description) {
  std::string key = to_lower(name);
  if (!is_identifier(key)) {
    throw std::invalid_argument("'" + key + "' is not a valid type name");
  }
  if (key == kRootType || parent_.count(key) > 0) {
    throw std::invalid_argument("type '" + key + "' declared twice");
  }
  order_.push_back(key);
  parent_.emplace(key, parent.empty() ? std::string(kRootType)
                                      : to_lower(parent));
  description_.emplace(key, std::string(description));
}

void TypeHierarchy::set_parent(std::string_view name, std::string_view parent) {
  auto it = parent_.find(to_lower(name));
  if (it == parent_.end()) throw UnknownTypeError(std::string(name));
  it->second = to_lower(parent);
}

void TypeHierarchy::set_description(std::string_view name,
                                    std::string_view description) {
  auto it = description_.find(to_lower(name));
  if (it == description_.end()) throw UnknownTypeError(std::string(name));
  it->second = std::string(description);
}

void TypeHierarchy::remove(std::string_view name) {
  std::string key = to_lower(name);
  order_.erase(std::remove(order_.begin(), order_.end(), key), order_.end());
  parent_.erase(key);
  description_.erase(key);
}

bool TypeHierarchy::contains(std::string_view name) const {
  return name == kRootType || parent_.find(name) != parent_.end();
}

const std::string& TypeHierarchy::parent_of(std::string_view name) const {
  static const std::string root(kRootType);
  if (name == kRootType) return root;
  auto it = parent_.find(name);
  if (it == parent_.end()) throw UnknownTypeError(std::string(name));
  return it->second;
}

const std::string& TypeHierarchy::description_of(std::string_view name) const {
  static const std::string empty;
  auto it = description_.find(name);
  return it == description_.end() ? empty : it->second;
}

std::vector<std::string> TypeHierarchy::children_of(
    std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& t : order_) {
    if (parent_.at(t) == name) out.push_back(t);
  }
  return out;
}

bool TypeHierarchy::is_subtype(std::string_view sub,
                               std::string_view sup) const {
  if (!contains(sub)) throw UnknownTypeError(std::string(sub));
  if (!contains(sup)) throw UnknownTypeError(std::string(sup));
  std::string current(sub);
  // The bound guards against cycles in a hierarchy still under construction.
  for (size_t steps = 0; steps <= order_.size() + 1; ++steps) {
    if (current == sup) return true;
    if (current == kRootType) return false;
    auto it = parent_.find(current);
    if (it == parent_.end()) return false;
    current = it->second;
  }
  return false;
}

std::optional<std::string> TypeHierarchy::tree_error() const {
  for (const auto& t : order_) {
    const std::string& p = parent_.at(t);
    if (!contains(p)) {
      return "type '" + t + "' has undeclared parent '" + p + "'";
    }
  }
  for (const auto& t : order_) {
    std::set<std::string> seen;
    std::string current = t;
    while (current != kRootType) {
      if (!seen.insert(current).second) {
        return "type '" + t + "' is part of a cycle in the hierarchy";
      }
      current = parent_.at(current);
    }
  }
  return std::nullopt;
}

bool is_subtype(const TypeHierarchy& hierarchy, std::string_view sub,
                std::string_view sup) {
  return hierarchy.is_subtype(sub, sup);
}

Formula Formula::make_atom(Atom a) {
  Formula f;
  f.kind = Kind::Atom;
  f.atom = std::move(a);
  return f;
}

Formula Formula::make_equal(std::string lhs, std::string rhs) {
  Formula f;
  f.kind = Kind::Equal;
  f.atom.predicate = "=";
  f.atom.args = {std::move(lhs), std::move(rhs)};
  return f;
}

Formula Formula::make_not(Formula inner) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::make_and(std::vector<Formula> fs) {
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(fs);
  return f;
}

Formula Formula::make_or(std::vector<Formula> fs) {
  Formula f;
  f.kind = Kind::Or;
  f.children = std::move(fs);
  return f;
}

Formula Formula::make_imply(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = Kind::Imply;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

Formula Formula::make_forall(TypedList vars, Formula body) {
  Formula f;
  f.kind = Kind::Forall;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::make_exists(TypedList vars, Formula body) {
  Formula f;
  f.kind = Kind::Exists;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  return f;
}

Effect Effect::make_literal(Atom a, bool neg) {
  Effect e;
  e.kind = Kind::Literal;
  e.atom = std::move(a);
  e.negated = neg;
  return e;
}

Effect Effect::make_and(std::vector<Effect> es) {
  Effect e;
  e.kind = Kind::And;
  e.children = std::move(es);
  return e;
}

Effect Effect::make_forall(TypedList vars, Effect body) {
  Effect e;
  e.kind = Kind::Forall;
  e.vars = std::move(vars);
  e.children.push_back(std::move(body));
  return e;
}

Effect Effect::make_when(Formula condition, Effect body) {
  Effect e;
  e.kind = Kind::When;
  e.condition = std::move(condition);
  e.children.push_back(std::move(body));
  return e;
}

Effect Effect::make_increase(long amount) {
  Effect e;
  e.kind = Kind::IncreaseCost;
  e.amount = amount;
  return e;
}

bool PredicateDecl::same_signature(const PredicateDecl& other) const {
  if (name != other.name || params.size() != other.params.size()) {
    return false;
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].type != other.params[i].type) return false;
  }
  return true;
}

const std::vector<std::string>& DomainSpec::requirements() {
  static const std::vector<std::string> reqs = {
      ":strips",
      ":typing",
      ":equality",
      ":negative-preconditions",
      ":disjunctive-preconditions",
      ":universal-preconditions",
      ":conditional-effects",
      ":existential-preconditions",
      ":action-costs"};
  return reqs;
}

const PredicateDecl* DomainSpec::find_predicate(std::string_view n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const ActionSchema* DomainSpec::find_action(std::string_view n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

namespace {

bool effect_has_increase(const Effect& e) {
  if (e.kind == Effect::Kind::IncreaseCost) return true;
  return std::any_of(e.children.begin(), e.children.end(), effect_has_increase);
}

}  // namespace

bool DomainSpec::uses_action_costs() const {
  return std::any_of(actions.begin(), actions.end(), [](const ActionSchema& a) {
    return effect_has_increase(a.effect);
  });
}

const TypedName* ProblemSpec::find_object(std::string_view n) const {
  for (const auto& o : objects) {
    if (o.name == n) return &o;
  }
  return nullptr;
}

bool is_reserved_word(std::string_view name) {
  static constexpr std::array<std::string_view, 18> kReserved = {
      "and",    "or",      "not",     "imply",      "forall",   "exists",
      "when",   "increase", "decrease", "assign",   "either",   "define",
      "domain", "problem", "object",  "total-cost", "minimize", "maximize"};
  return std::find(kReserved.begin(), kReserved.end(), name) != kReserved.end();
}

}  // namespace nl2plan::pddl
