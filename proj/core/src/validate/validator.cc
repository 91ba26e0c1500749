#include "nl2plan/validate/validator.h"

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "nl2plan/pddl/printer.h"
#include "nl2plan/pddl/sexpr.h"

namespace nl2plan::validate {

namespace {

using pddl::Atom;
using pddl::Effect;
using pddl::Formula;
using pddl::PredicateDecl;
using pddl::TypedList;
using pddl::TypedName;

constexpr std::array<std::pair<IssueCode, std::string_view>, 24> kCodeNames = {{
    {IssueCode::UnknownKeyword, "unknown-keyword"},
    {IssueCode::MisplacedKeyword, "misplaced-keyword"},
    {IssueCode::MissingType, "missing-type"},
    {IssueCode::UnknownType, "unknown-type"},
    {IssueCode::UndefinedPredicate, "undefined-predicate"},
    {IssueCode::ArityMismatch, "arity-mismatch"},
    {IssueCode::ArgumentTypeMismatch, "argument-type-mismatch"},
    {IssueCode::UnboundVariable, "unbound-variable"},
    {IssueCode::ConstantInAction, "constant-in-action"},
    {IssueCode::DuplicateVariable, "duplicate-variable"},
    {IssueCode::ConflictingPredicate, "conflicting-predicate"},
    {IssueCode::InvalidEffectConnective, "invalid-effect-connective"},
    {IssueCode::NegatedNonAtom, "negated-non-atom"},
    {IssueCode::InvalidCostIncrease, "invalid-cost-increase"},
    {IssueCode::ReservedName, "reserved-name"},
    {IssueCode::NameCollision, "name-collision"},
    {IssueCode::InvalidIdentifier, "invalid-identifier"},
    {IssueCode::DuplicateObject, "duplicate-object"},
    {IssueCode::ObjectShadowsType, "object-shadows-type"},
    {IssueCode::UnknownObjectType, "unknown-object-type"},
    {IssueCode::NegationInInit, "negation-in-init"},
    {IssueCode::InvalidInitEntry, "invalid-init-entry"},
    {IssueCode::VariableInInit, "variable-in-init"},
    {IssueCode::UndefinedObject, "undefined-object"},
}};

constexpr std::array<std::pair<Category, std::string_view>, 12> kCategoryNames = {{
    {Category::AllPassed, "all-passed"},
    {Category::Keywords, "keywords"},
    {Category::Types, "types"},
    {Category::Predicates, "predicates"},
    {Category::Arity, "arity"},
    {Category::Binding, "binding"},
    {Category::Conflicts, "conflicts"},
    {Category::EffectGrammar, "effect-grammar"},
    {Category::Names, "names"},
    {Category::Objects, "objects"},
    {Category::Init, "init"},
    {Category::Goal, "goal"},
}};

bool is_keyword_symbol(const std::string& name) {
  return (!name.empty() && name.front() == ':') || pddl::is_reserved_word(name);
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string quoted_list(const std::vector<std::string>& items) {
  return items.empty() ? "none" : join(items, ", ");
}

// Visits every atom of an action in source order together with the
// variables in scope at that point.
struct AtomUse {
  const Atom* atom;
  std::string location;
  const TypedList* scope;
  bool equality;
};

struct QuantifierUse {
  const TypedList* vars;
  std::string location;
};

class ActionWalker {
 public:
  explicit ActionWalker(const pddl::ActionSchema& action)
      : action_(action), scope_(action.params) {
    walk_formula(action.precondition, section("precondition"));
    walk_effect(action.effect, section("effect"));
  }

  std::vector<AtomUse> atoms;
  std::vector<QuantifierUse> quantifiers;
  std::vector<const Effect*> malformed;
  // Each use keeps its own copy of the scope so the pointers stay valid.
  std::vector<std::unique_ptr<TypedList>> scopes;

 private:
  std::string section(std::string_view part) const {
    return "action " + action_.name + "/" + std::string(part);
  }

  const TypedList* snapshot() {
    scopes.push_back(std::make_unique<TypedList>(scope_));
    return scopes.back().get();
  }

  void push_vars(const TypedList& vars, const std::string& location) {
    quantifiers.push_back({&vars, location});
    scope_.insert(scope_.end(), vars.begin(), vars.end());
  }

  void walk_formula(const Formula& f, const std::string& location) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        atoms.push_back({&f.atom, location, snapshot(), false});
        return;
      case Formula::Kind::Equal:
        atoms.push_back({&f.atom, location, snapshot(), true});
        return;
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        size_t mark = scope_.size();
        push_vars(f.vars, location);
        for (const auto& c : f.children) walk_formula(c, location);
        scope_.resize(mark);
        return;
      }
      default:
        for (const auto& c : f.children) walk_formula(c, location);
    }
  }

  void walk_effect(const Effect& e, const std::string& location) {
    switch (e.kind) {
      case Effect::Kind::Literal:
        atoms.push_back({&e.atom, location, snapshot(), false});
        return;
      case Effect::Kind::Malformed:
        malformed.push_back(&e);
        return;
      case Effect::Kind::IncreaseCost:
        return;
      case Effect::Kind::Forall: {
        size_t mark = scope_.size();
        push_vars(e.vars, location);
        for (const auto& c : e.children) walk_effect(c, location);
        scope_.resize(mark);
        return;
      }
      case Effect::Kind::When:
        walk_formula(e.condition, location);
        for (const auto& c : e.children) walk_effect(c, location);
        return;
      case Effect::Kind::And:
        for (const auto& c : e.children) walk_effect(c, location);
        return;
    }
  }

  const pddl::ActionSchema& action_;
  TypedList scope_;
};

const TypedName* find_in_scope(const TypedList& scope, const std::string& name) {
  // Innermost binding wins.
  for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
    if (it->name == name) return &*it;
  }
  return nullptr;
}

class ActionChecker {
 public:
  ActionChecker(const pddl::ActionDraft& draft, const pddl::DomainSpec& context)
      : draft_(draft),
        action_(draft.action),
        context_(context),
        walk_(draft.action) {}

  ValidationReport run() {
    using Check = void (ActionChecker::*)();
    const std::array<std::pair<Category, Check>, 8> checks = {{
        {Category::Keywords, &ActionChecker::check_keywords},
        {Category::Types, &ActionChecker::check_types},
        {Category::Predicates, &ActionChecker::check_predicates},
        {Category::Arity, &ActionChecker::check_arity},
        {Category::Binding, &ActionChecker::check_binding},
        {Category::Conflicts, &ActionChecker::check_conflicts},
        {Category::EffectGrammar, &ActionChecker::check_effects},
        {Category::Names, &ActionChecker::check_names},
    }};
    for (const auto& [category, check] : checks) {
      (this->*check)();
      if (!issues_.empty()) return {category, std::move(issues_)};
    }
    return {};
  }

 private:
  void add(IssueCode code, std::string location, std::string message,
           std::string fix) {
    issues_.push_back(
        {code, std::move(location), std::move(message), std::move(fix)});
  }

  std::string where(std::string_view part) const {
    return "action " + action_.name + "/" + std::string(part);
  }

  // The declaration an atom is checked against. Declarations already in the
  // domain take precedence over ones the draft introduces.
  const PredicateDecl* signature(const std::string& name) const {
    if (const PredicateDecl* p = context_.find_predicate(name)) return p;
    for (const auto& p : draft_.new_predicates) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  std::vector<std::string> type_names() const {
    return context_.hierarchy.types();
  }

  void check_keywords() {
    for (const auto& s : draft_.section_issues) {
      if (s.detail.find("more than once") != std::string::npos) {
        add(IssueCode::MisplacedKeyword, where("sections"),
            "Action " + action_.name + " gives the section " + s.keyword +
                " more than once.",
            "keep a single " + s.keyword + " section");
      } else {
        add(IssueCode::UnknownKeyword, where("sections"),
            "Action " + action_.name + " uses the unknown section keyword " +
                s.keyword + ".",
            "use only :parameters, :precondition, :effect and "
            ":new-predicates");
      }
    }
    std::set<std::string> seen;
    for (const auto& use : walk_.atoms) {
      if (use.equality) continue;
      const std::string& name = use.atom->predicate;
      if (!is_keyword_symbol(name)) continue;
      if (!seen.insert(use.location + "|" + name).second) continue;
      add(IssueCode::MisplacedKeyword, use.location,
          "The keyword " + name + " is used in " + use.location +
              " where a predicate is expected: " + pddl::print_atom(*use.atom) +
              ".",
          "remove " + name + " or move it to a place where it is allowed");
    }
  }

  void check_typed_list(const TypedList& list, const std::string& location,
                        const std::string& owner) {
    for (const auto& v : list) {
      if (v.type.empty()) {
        add(IssueCode::MissingType, location,
            "The variable " + v.name + " in " + owner + " has no type.",
            "write the type after the variable, as in " + v.name +
                " - <type>, using one of: " + quoted_list(type_names()));
      } else if (!context_.hierarchy.contains(v.type)) {
        add(IssueCode::UnknownType, location,
            "The variable " + v.name + " in " + owner + " has the type " +
                v.type + ", which is not defined.",
            "replace " + v.type + " with one of the defined types: " +
                quoted_list(type_names()));
      }
    }
  }

  void check_types() {
    check_typed_list(action_.params, where("parameters"),
                     "the parameters of " + action_.name);
    for (const auto& q : walk_.quantifiers) {
      check_typed_list(*q.vars, q.location, "a quantifier in " + q.location);
    }
    for (const auto& p : draft_.new_predicates) {
      check_typed_list(p.params, where("new-predicates"),
                       "the new predicate " + p.name);
    }
  }

  void check_predicates() {
    std::set<std::string> reported;
    for (const auto& use : walk_.atoms) {
      if (use.equality) continue;
      const std::string& name = use.atom->predicate;
      if (signature(name) != nullptr || !reported.insert(name).second) {
        continue;
      }
      add(IssueCode::UndefinedPredicate, use.location,
          "The predicate " + name + " used in " + pddl::print_atom(*use.atom) +
              " is not defined.",
          "define predicate " + name + " or use an existing one");
    }
  }

  void check_arity() {
    for (const auto& use : walk_.atoms) {
      if (use.equality) continue;
      const PredicateDecl* decl = signature(use.atom->predicate);
      if (decl == nullptr) continue;
      const std::string text = pddl::print_atom(*use.atom);
      if (decl->params.size() != use.atom->args.size()) {
        add(IssueCode::ArityMismatch, use.location,
            "The predicate " + decl->name + " takes " +
                std::to_string(decl->params.size()) + " argument(s) but " +
                text + " gives " + std::to_string(use.atom->args.size()) + ".",
            "use " + decl->name + " as declared: " +
                pddl::print_predicate(*decl));
        continue;
      }
      for (size_t i = 0; i < decl->params.size(); ++i) {
        const std::string& arg = use.atom->args[i];
        const std::string& wanted = decl->params[i].type;
        const std::string position = std::to_string(i + 1);
        if (!arg.empty() && arg.front() == '(') {
          add(IssueCode::ArgumentTypeMismatch, use.location,
              "Argument " + position + " of " + text +
                  " is an expression, but only variables may be used.",
              "pass a parameter of type " +
                  (wanted.empty() ? std::string(pddl::kRootType) : wanted) +
                  " at position " + position + " of " + decl->name);
          continue;
        }
        const TypedName* var = find_in_scope(*use.scope, arg);
        if (var == nullptr || var->type.empty() || wanted.empty()) continue;
        if (!context_.hierarchy.contains(var->type) ||
            !context_.hierarchy.contains(wanted)) {
          continue;
        }
        if (!context_.hierarchy.is_subtype(var->type, wanted)) {
          add(IssueCode::ArgumentTypeMismatch, use.location,
              "In " + text + ", " + arg + " has type " + var->type +
                  " but " + decl->name + " expects " + wanted +
                  " at position " + position + ".",
              "pass a variable of type " + wanted + " (or a subtype) at "
              "position " + position + " of " + decl->name);
        }
      }
    }
  }

  void check_duplicates(const TypedList& list, const std::string& location) {
    std::set<std::string> seen;
    for (const auto& v : list) {
      if (!seen.insert(v.name).second) {
        add(IssueCode::DuplicateVariable, location,
            "The variable " + v.name + " is declared more than once in " +
                location + ".",
            "rename one of the " + v.name + " variables");
      }
    }
  }

  void check_binding() {
    check_duplicates(action_.params, where("parameters"));
    for (const auto& q : walk_.quantifiers) check_duplicates(*q.vars, q.location);
    for (const auto& p : draft_.new_predicates) {
      check_duplicates(p.params, where("new-predicates"));
    }
    std::set<std::string> reported;
    for (const auto& use : walk_.atoms) {
      const std::string text = use.equality
                                   ? "(= " + join(use.atom->args, " ") + ")"
                                   : pddl::print_atom(*use.atom);
      for (const auto& arg : use.atom->args) {
        if (!arg.empty() && arg.front() == '(') continue;
        if (pddl::is_variable(arg)) {
          if (find_in_scope(*use.scope, arg) != nullptr) continue;
          if (!reported.insert(arg).second) continue;
          add(IssueCode::UnboundVariable, use.location,
              "The variable " + arg + " in " + text + " is not bound.",
              "add " + arg + " to the parameters of " + action_.name +
                  " or bind it with forall or exists");
        } else {
          if (!reported.insert(arg).second) continue;
          add(IssueCode::ConstantInAction, use.location,
              "The object name " + arg + " appears in " + text +
                  "; actions may only refer to their variables.",
              "replace " + arg + " with a parameter such as ?" + arg);
        }
      }
    }
  }

  void check_conflicts() {
    for (size_t i = 0; i < draft_.new_predicates.size(); ++i) {
      const PredicateDecl& p = draft_.new_predicates[i];
      const PredicateDecl* other = context_.find_predicate(p.name);
      for (size_t k = 0; other == nullptr && k < i; ++k) {
        if (draft_.new_predicates[k].name == p.name) {
          other = &draft_.new_predicates[k];
        }
      }
      if (other == nullptr || other->same_signature(p)) continue;
      add(IssueCode::ConflictingPredicate, where("new-predicates"),
          "The new predicate " + pddl::print_predicate(p) +
              " conflicts with the existing declaration " +
              pddl::print_predicate(*other) + ".",
          "use " + pddl::print_predicate(*other) +
              " as declared or give the new predicate another name");
    }
  }

  void check_effects() {
    for (const Effect* e : walk_.malformed) {
      const std::string& kw = e->malformed_keyword;
      if (kw == "not") {
        add(IssueCode::NegatedNonAtom, where("effect"),
            "The effect " + e->raw + " negates something that is not a "
            "single predicate.",
            "negate each predicate separately, as in (not (p ?x))");
      } else if (kw == "increase" || kw == "decrease" || kw == "assign" ||
                 kw == "scale-up" || kw == "scale-down") {
        add(IssueCode::InvalidCostIncrease, where("effect"),
            "The effect " + e->raw + " is not a supported cost update.",
            "use (increase (total-cost) N) with a non-negative integer N");
      } else {
        add(IssueCode::InvalidEffectConnective, where("effect"),
            "The effect " + e->raw + " uses " + kw +
                ", which effects cannot contain.",
            "build effects only from and, not, forall and when");
      }
    }
  }

  void check_name(const std::string& name, const std::string& location,
                  const std::string& what) {
    if (pddl::is_reserved_word(name)) {
      add(IssueCode::ReservedName, location,
          "The " + what + " name " + name + " is a reserved PDDL word.",
          "rename the " + what + ", e.g. " + name + "-" + what);
    } else if (!pddl::is_identifier(name)) {
      add(IssueCode::InvalidIdentifier, location,
          "The " + what + " name " + name + " is not a valid identifier.",
          "use a name of letters, digits, '-' and '_' that starts with a "
          "letter");
    }
  }

  void check_names() {
    check_name(action_.name, where("name"), "action");
    for (const auto& p : draft_.new_predicates) {
      check_name(p.name, where("new-predicates"), "predicate");
    }
    if (context_.find_action(action_.name) != nullptr) {
      add(IssueCode::NameCollision, where("name"),
          "An action named " + action_.name + " already exists.",
          "give the action a different name");
    }
    bool clashes = context_.find_predicate(action_.name) != nullptr;
    for (const auto& p : draft_.new_predicates) {
      clashes = clashes || p.name == action_.name;
    }
    if (clashes) {
      add(IssueCode::NameCollision, where("name"),
          "The action " + action_.name + " has the same name as a predicate.",
          "rename the action, e.g. do-" + action_.name);
    }
    for (const auto& p : draft_.new_predicates) {
      if (context_.hierarchy.contains(p.name) ||
          context_.find_action(p.name) != nullptr) {
        add(IssueCode::NameCollision, where("new-predicates"),
            "The new predicate " + p.name +
                " has the same name as a type or action.",
            "rename the predicate, e.g. is-" + p.name);
      }
    }
  }

  const pddl::ActionDraft& draft_;
  const pddl::ActionSchema& action_;
  const pddl::DomainSpec& context_;
  ActionWalker walk_;
  std::vector<ValidationIssue> issues_;
};

class TaskChecker {
 public:
  TaskChecker(const pddl::TaskDraft& draft, const pddl::DomainSpec& domain)
      : draft_(draft), domain_(domain) {}

  ValidationReport run() {
    check_objects();
    if (!issues_.empty()) return {Category::Objects, std::move(issues_)};
    check_init();
    if (!issues_.empty()) return {Category::Init, std::move(issues_)};
    check_goal();
    if (!issues_.empty()) return {Category::Goal, std::move(issues_)};
    return {};
  }

 private:
  void add(IssueCode code, std::string location, std::string message,
           std::string fix) {
    issues_.push_back(
        {code, std::move(location), std::move(message), std::move(fix)});
  }

  std::string type_of_object(const std::string& name) const {
    for (const auto& o : draft_.objects) {
      if (o.name == name) {
        return o.type.empty() ? std::string(pddl::kRootType) : o.type;
      }
    }
    return {};
  }

  void check_objects() {
    std::set<std::string> seen;
    for (size_t i = 0; i < draft_.objects.size(); ++i) {
      const TypedName& o = draft_.objects[i];
      const std::string loc = "objects[" + std::to_string(i) + "]";
      if (!seen.insert(o.name).second) {
        add(IssueCode::DuplicateObject, loc,
            "The object " + o.name + " is declared more than once.",
            "declare " + o.name + " once with a single type");
        continue;
      }
      if (o.name == pddl::kRootType || domain_.hierarchy.contains(o.name)) {
        add(IssueCode::ObjectShadowsType, loc,
            "The object " + o.name + " has the same name as a type.",
            "rename the object, e.g. " + o.name + "1");
      } else if (pddl::is_reserved_word(o.name)) {
        add(IssueCode::ReservedName, loc,
            "The object name " + o.name + " is a reserved PDDL word.",
            "rename the object, e.g. " + o.name + "1");
      } else if (!pddl::is_identifier(o.name)) {
        add(IssueCode::InvalidIdentifier, loc,
            "The object name " + o.name + " is not a valid identifier.",
            "use a name of letters, digits, '-' and '_' that starts with a "
            "letter");
      }
      if (!o.type.empty() && !domain_.hierarchy.contains(o.type)) {
        add(IssueCode::UnknownObjectType, loc,
            "The object " + o.name + " has the type " + o.type +
                ", which is not defined.",
            "use one of the defined types: " +
                quoted_list(domain_.hierarchy.types()));
      }
    }
  }

  // Shared by init and goal. `scope` holds quantified goal variables.
  void check_atom(const Atom& atom, const std::string& loc,
                  const TypedList& scope) {
    const std::string text = pddl::print_atom(atom);
    if (is_keyword_symbol(atom.predicate)) {
      add(IssueCode::MisplacedKeyword, loc,
          "The keyword " + atom.predicate + " is used in " + text +
              " where a predicate is expected.",
          "remove " + atom.predicate + " from " + loc);
      return;
    }
    const PredicateDecl* decl = domain_.find_predicate(atom.predicate);
    if (decl == nullptr) {
      add(IssueCode::UndefinedPredicate, loc,
          "The predicate " + atom.predicate + " used in " + text +
              " is not defined in the domain.",
          "define predicate " + atom.predicate + " or use an existing one");
      return;
    }
    if (decl->params.size() != atom.args.size()) {
      add(IssueCode::ArityMismatch, loc,
          "The predicate " + decl->name + " takes " +
              std::to_string(decl->params.size()) + " argument(s) but " + text +
              " gives " + std::to_string(atom.args.size()) + ".",
          "use " + decl->name + " as declared: " + pddl::print_predicate(*decl));
      return;
    }
    for (size_t i = 0; i < atom.args.size(); ++i) {
      const std::string& arg = atom.args[i];
      std::string type;
      if (pddl::is_variable(arg)) {
        const TypedName* var = find_in_scope(scope, arg);
        if (var == nullptr) {
          add(IssueCode::UnboundVariable, loc,
              "The variable " + arg + " in " + text + " is not bound.",
              "bind " + arg + " with forall or exists, or use an object");
          continue;
        }
        type = var->type.empty() ? std::string(pddl::kRootType) : var->type;
      } else {
        type = type_of_object(arg);
        if (type.empty()) {
          add(IssueCode::UndefinedObject, loc,
              "The object " + arg + " in " + text + " is not declared.",
              "declare " + arg + " in the objects or use an existing object");
          continue;
        }
      }
      const std::string& wanted = decl->params[i].type;
      if (wanted.empty() || !domain_.hierarchy.contains(type) ||
          !domain_.hierarchy.contains(wanted)) {
        continue;
      }
      if (!domain_.hierarchy.is_subtype(type, wanted)) {
        add(IssueCode::ArgumentTypeMismatch, loc,
            "In " + text + ", " + arg + " has type " + type + " but " +
                decl->name + " expects " + wanted + " at position " +
                std::to_string(i + 1) + ".",
            "use an object of type " + wanted + " at position " +
                std::to_string(i + 1) + " of " + decl->name);
      }
    }
  }

  void check_init() {
    const TypedList no_scope;
    for (size_t i = 0; i < draft_.init.size(); ++i) {
      const Formula& f = draft_.init[i];
      const std::string loc = "init[" + std::to_string(i) + "]";
      const std::string text = pddl::print_formula(f);
      if (f.kind == Formula::Kind::Not) {
        add(IssueCode::NegationInInit, loc,
            "The initial state contains the negation " + text + ".",
            "remove " + text + "; facts that are not listed are false");
        continue;
      }
      if (f.kind != Formula::Kind::Atom) {
        add(IssueCode::InvalidInitEntry, loc,
            "The initial state entry " + text + " is not a ground atom.",
            "list each initial fact as its own atom, e.g. (p o1 o2)");
        continue;
      }
      bool has_var = false;
      for (const auto& arg : f.atom.args) {
        has_var = has_var || pddl::is_variable(arg);
      }
      if (has_var) {
        add(IssueCode::VariableInInit, loc,
            "The initial state entry " + text + " contains a variable.",
            "replace the variable with a declared object");
        continue;
      }
      check_atom(f.atom, loc, no_scope);
    }
  }

  void check_goal_formula(const Formula& f, TypedList& scope) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        check_atom(f.atom, "goal", scope);
        return;
      case Formula::Kind::Equal:
        for (const auto& arg : f.atom.args) {
          if (pddl::is_variable(arg) ? find_in_scope(scope, arg) == nullptr
                                     : type_of_object(arg).empty()) {
            add(pddl::is_variable(arg) ? IssueCode::UnboundVariable
                                       : IssueCode::UndefinedObject,
                "goal", "The term " + arg + " in " + pddl::print_formula(f) +
                            " is not declared.",
                "use a declared object or a quantified variable");
          }
        }
        return;
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        for (const auto& v : f.vars) {
          if (!v.type.empty() && !domain_.hierarchy.contains(v.type)) {
            add(IssueCode::UnknownType, "goal",
                "The goal variable " + v.name + " has the type " + v.type +
                    ", which is not defined.",
                "use one of the defined types: " +
                    quoted_list(domain_.hierarchy.types()));
          }
        }
        size_t mark = scope.size();
        scope.insert(scope.end(), f.vars.begin(), f.vars.end());
        for (const auto& c : f.children) check_goal_formula(c, scope);
        scope.resize(mark);
        return;
      }
      default:
        for (const auto& c : f.children) check_goal_formula(c, scope);
    }
  }

  void check_goal() {
    TypedList scope;
    check_goal_formula(draft_.goal, scope);
  }

  const pddl::TaskDraft& draft_;
  const pddl::DomainSpec& domain_;
  std::vector<ValidationIssue> issues_;
};

}  // namespace

std::string_view to_string(IssueCode code) {
  for (const auto& [c, name] : kCodeNames) {
    if (c == code) return name;
  }
  throw std::invalid_argument("unknown issue code");
}

std::optional<IssueCode> issue_code_from_string(std::string_view text) {
  for (const auto& [c, name] : kCodeNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Category category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  throw std::invalid_argument("unknown category");
}

std::optional<Category> category_from_string(std::string_view text) {
  for (const auto& [c, name] : kCategoryNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

const std::vector<IssueCode>& all_issue_codes() {
  static const std::vector<IssueCode> codes = [] {
    std::vector<IssueCode> out;
    for (const auto& entry : kCodeNames) out.push_back(entry.first);
    return out;
  }();
  return codes;
}

const std::vector<Category>& action_categories() {
  static const std::vector<Category> cats = {
      Category::Keywords, Category::Types,    Category::Predicates,
      Category::Arity,    Category::Binding,  Category::Conflicts,
      Category::EffectGrammar, Category::Names};
  return cats;
}

ValidationReport validate_action(const pddl::ActionDraft& draft,
                                 const pddl::DomainSpec& context) {
  return ActionChecker(draft, context).run();
}

ValidationReport validate_task(const pddl::TaskDraft& draft,
                               const pddl::DomainSpec& domain) {
  return TaskChecker(draft, domain).run();
}

std::string render_feedback(const ValidationReport& report) {
  if (report.issues.empty()) {
    throw std::invalid_argument("render_feedback: report has no issues");
  }
  std::string out;
  for (size_t i = 0; i < report.issues.size(); ++i) {
    const ValidationIssue& issue = report.issues[i];
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + issue.message +
           " Fix: " + issue.suggested_fix;
  }
  return out;
}

void to_json(nlohmann::json& j, const ValidationIssue& issue) {
  j = {{"code", to_string(issue.code)},
       {"location", issue.location},
       {"message", issue.message},
       {"suggested_fix", issue.suggested_fix}};
}

void from_json(const nlohmann::json& j, ValidationIssue& issue) {
  auto code = issue_code_from_string(j.at("code").get<std::string>());
  if (!code) {
    throw std::invalid_argument("unknown issue code " + j.at("code").dump());
  }
  issue.code = *code;
  issue.location = j.at("location").get<std::string>();
  issue.message = j.at("message").get<std::string>();
  issue.suggested_fix = j.at("suggested_fix").get<std::string>();
}

void to_json(nlohmann::json& j, const ValidationReport& report) {
  j = {{"category", to_string(report.category)},
       {"passed", report.passed()},
       {"issues", report.issues}};
}

void from_json(const nlohmann::json& j, ValidationReport& report) {
  auto category = category_from_string(j.at("category").get<std::string>());
  if (!category) {
    throw std::invalid_argument("unknown category " + j.at("category").dump());
  }
  report.category = *category;
  report.issues = j.at("issues").get<std::vector<ValidationIssue>>();
}

}  // namespace nl2plan::validate
