#include "nl2plan/pddl/parser.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>

namespace nl2plan::pddl {

namespace {

bool is_keyword_symbol(std::string_view s) {
  return !s.empty() && s.front() == ':';
}

bool is_variable_name(std::string_view s) {
  return s.size() > 1 && s.front() == '?' && is_identifier(s.substr(1));
}

std::optional<long> parse_nonnegative(std::string_view s) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

// Variables bound by parameter lists and quantifiers, innermost last, plus
// the problem objects when parsing goals.
struct TermScope {
  std::vector<TypedName> vars;
  const TypedList* objects = nullptr;

  std::optional<std::string> type_of(const std::string& term) const {
    if (is_variable(term)) {
      for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
        if (it->name == term) return it->type;
      }
      return std::nullopt;
    }
    if (objects != nullptr) {
      for (const auto& o : *objects) {
        if (o.name == term) return o.type;
      }
    }
    return std::nullopt;
  }
};

class Parser {
 public:
  Parser(ParseMode mode, const SExprDocument& doc) : mode_(mode), doc_(doc) {}

  bool strict() const { return mode_ == ParseMode::Strict; }

  // Context used for strict checks of predicates and types.
  void set_domain(const DomainSpec* domain) { domain_ = domain; }

  [[noreturn]] void fail(const SExpr& at, const std::string& message,
                         const std::string& hint = {}) const {
    throw ParseError(at.pos, message, hint);
  }

  const std::string& expect_symbol(const SExpr& e, const char* what) const {
    if (!e.is_symbol()) fail(e, std::string("expected ") + what);
    return e.symbol;
  }

  const SExpr& expect_list(const SExpr& e, const char* what) const {
    if (!e.is_list()) fail(e, std::string("expected ") + what);
    return e;
  }

  TypedList parse_typed_list(const SExpr& list, bool variables,
                             size_t first = 0) const {
    expect_list(list, variables ? "a parameter list" : "an object list");
    TypedList out;
    std::vector<size_t> pending;
    auto check_name = [&](const SExpr& item) {
      const std::string& n = item.symbol;
      if (variables && !is_variable_name(n)) {
        fail(item, "'" + n + "' is not a variable",
             "variable names start with '?'");
      }
      if (!variables && strict() && !is_identifier(n)) {
        fail(item, "'" + n + "' is not a valid object name");
      }
    };
    for (size_t i = first; i < list.items.size(); ++i) {
      const SExpr& item = list.items[i];
      if (item.is_symbol("-")) {
        if (i + 1 >= list.items.size()) fail(item, "missing type after '-'");
        const SExpr& type = list.items[i + 1];
        if (type.head_is("either")) {
          fail(type, "'either' types are not supported",
               "declare a common parent type instead");
        }
        const std::string& tname = expect_symbol(type, "a type name");
        if (strict() && domain_ != nullptr &&
            !domain_->hierarchy.contains(tname)) {
          fail(type, "undeclared type '" + tname + "'",
               "declare the type in :types or use an existing one");
        }
        if (pending.empty()) fail(item, "type given without any names");
        for (size_t idx : pending) out[idx].type = tname;
        pending.clear();
        ++i;
        continue;
      }
      expect_symbol(item, variables ? "a variable" : "an object name");
      check_name(item);
      if (strict()) {
        for (const auto& existing : out) {
          if (existing.name == item.symbol) {
            fail(item, "'" + item.symbol + "' is declared twice");
          }
        }
      }
      pending.push_back(out.size());
      out.push_back({item.symbol, ""});
    }
    if (strict()) {
      for (auto& tn : out) {
        if (tn.type.empty()) tn.type = std::string(kRootType);
      }
    }
    return out;
  }

  void check_atom(const SExpr& at, const Atom& atom,
                  const TermScope& scope) const {
    if (!strict() || domain_ == nullptr) return;
    if (is_keyword_symbol(atom.predicate) || is_reserved_word(atom.predicate)) {
      fail(at, "keyword '" + atom.predicate + "' used where a predicate is "
                   "expected",
           "move the keyword to its proper place");
    }
    const PredicateDecl* decl = domain_->find_predicate(atom.predicate);
    if (decl == nullptr) {
      fail(at, "undefined predicate '" + atom.predicate + "'",
           "declare the predicate in :predicates");
    }
    if (decl->params.size() != atom.args.size()) {
      fail(at, "predicate '" + atom.predicate + "' expects " +
                   std::to_string(decl->params.size()) + " arguments, got " +
                   std::to_string(atom.args.size()));
    }
    for (size_t i = 0; i < atom.args.size(); ++i) {
      check_term(at, atom.args[i], scope, &decl->params[i].type);
    }
  }

  void check_term(const SExpr& at, const std::string& term,
                  const TermScope& scope, const std::string* wanted) const {
    if (!strict()) return;
    std::optional<std::string> type = scope.type_of(term);
    if (!type) {
      if (is_variable(term)) {
        fail(at, "unbound variable '" + term + "'",
             "add it to the parameters or bind it with a quantifier");
      }
      if (scope.objects == nullptr) {
        fail(at, "constant '" + term + "' used in an action",
             "use a parameter instead of an object name");
      }
      fail(at, "undefined object '" + term + "'",
           "declare the object in :objects");
    }
    if (wanted != nullptr && domain_ != nullptr && !type->empty() &&
        !domain_->hierarchy.is_subtype(*type, *wanted)) {
      fail(at, "'" + term + "' has type " + *type + " but " + *wanted +
                   " is required");
    }
  }

  Atom read_atom(const SExpr& e) const {
    Atom atom;
    atom.predicate = e.items.front().symbol;
    for (size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& arg = e.items[i];
      if (arg.is_list()) {
        if (strict()) fail(arg, "nested expression used as an argument");
        atom.args.push_back(arg.to_string());
      } else {
        atom.args.push_back(arg.symbol);
      }
    }
    return atom;
  }

  Formula parse_formula(const SExpr& e, TermScope& scope) const {
    expect_list(e, "a formula");
    if (e.items.empty()) return Formula::make_and();
    if (!e.items.front().is_symbol()) fail(e, "formula must start with a name");
    const std::string& head = e.items.front().symbol;
    const size_t argc = e.items.size() - 1;
    if (head == "and" || head == "or") {
      std::vector<Formula> parts;
      for (size_t i = 1; i < e.items.size(); ++i) {
        parts.push_back(parse_formula(e.items[i], scope));
      }
      return head == "and" ? Formula::make_and(std::move(parts))
                           : Formula::make_or(std::move(parts));
    }
    if (head == "not") {
      if (argc != 1) fail(e, "'not' takes exactly one argument");
      return Formula::make_not(parse_formula(e.items[1], scope));
    }
    if (head == "imply") {
      if (argc != 2) fail(e, "'imply' takes exactly two arguments");
      Formula lhs = parse_formula(e.items[1], scope);
      Formula rhs = parse_formula(e.items[2], scope);
      return Formula::make_imply(std::move(lhs), std::move(rhs));
    }
    if (head == "forall" || head == "exists") {
      if (argc != 2) fail(e, "'" + head + "' takes a variable list and a body");
      TypedList vars = parse_typed_list(e.items[1], true);
      size_t mark = scope.vars.size();
      scope.vars.insert(scope.vars.end(), vars.begin(), vars.end());
      Formula body = parse_formula(e.items[2], scope);
      scope.vars.resize(mark);
      return head == "forall" ? Formula::make_forall(std::move(vars), std::move(body))
                              : Formula::make_exists(std::move(vars), std::move(body));
    }
    if (head == "=") {
      if (argc != 2 || !e.items[1].is_symbol() || !e.items[2].is_symbol()) {
        fail(e, "'=' compares exactly two terms");
      }
      check_term(e, e.items[1].symbol, scope, nullptr);
      check_term(e, e.items[2].symbol, scope, nullptr);
      return Formula::make_equal(e.items[1].symbol, e.items[2].symbol);
    }
    Atom atom = read_atom(e);
    check_atom(e, atom, scope);
    return Formula::make_atom(std::move(atom));
  }

  Effect malformed(const SExpr& e, const std::string& keyword,
                   const std::string& message) const {
    if (strict()) {
      fail(e, message, "effects may only use and, not, forall, when and "
                       "increase (total-cost)");
    }
    Effect out;
    out.kind = Effect::Kind::Malformed;
    out.malformed_keyword = keyword;
    out.raw = e.to_string();
    return out;
  }

  Effect parse_effect(const SExpr& e, TermScope& scope) const {
    expect_list(e, "an effect");
    if (e.items.empty()) return Effect::make_and();
    if (!e.items.front().is_symbol()) fail(e, "effect must start with a name");
    const std::string& head = e.items.front().symbol;
    const size_t argc = e.items.size() - 1;
    if (head == "and") {
      std::vector<Effect> parts;
      for (size_t i = 1; i < e.items.size(); ++i) {
        parts.push_back(parse_effect(e.items[i], scope));
      }
      return Effect::make_and(std::move(parts));
    }
    if (head == "not") {
      if (argc != 1) fail(e, "'not' takes exactly one argument");
      const SExpr& inner = e.items[1];
      static const std::set<std::string, std::less<>> kConnectives = {
          "and", "or", "not", "imply", "forall", "exists", "when", "="};
      if (!inner.is_list() || inner.items.empty() ||
          !inner.items.front().is_symbol() ||
          kConnectives.count(inner.head()) > 0) {
        return malformed(e, "not", "'not' in an effect must wrap a single atom");
      }
      Atom atom = read_atom(inner);
      check_atom(inner, atom, scope);
      return Effect::make_literal(std::move(atom), true);
    }
    if (head == "forall") {
      if (argc != 2) fail(e, "'forall' takes a variable list and a body");
      TypedList vars = parse_typed_list(e.items[1], true);
      size_t mark = scope.vars.size();
      scope.vars.insert(scope.vars.end(), vars.begin(), vars.end());
      Effect body = parse_effect(e.items[2], scope);
      scope.vars.resize(mark);
      return Effect::make_forall(std::move(vars), std::move(body));
    }
    if (head == "when") {
      if (argc != 2) fail(e, "'when' takes a condition and an effect");
      Formula cond = parse_formula(e.items[1], scope);
      Effect body = parse_effect(e.items[2], scope);
      return Effect::make_when(std::move(cond), std::move(body));
    }
    if (head == "increase") {
      if (argc == 2 && e.items[1].is_list() && e.items[1].items.size() == 1 &&
          e.items[1].items[0].is_symbol("total-cost") && e.items[2].is_symbol()) {
        if (auto amount = parse_nonnegative(e.items[2].symbol)) {
          return Effect::make_increase(*amount);
        }
      }
      return malformed(e, "increase",
                       "only (increase (total-cost) N) with a non-negative "
                       "integer N is supported");
    }
    if (head == "or" || head == "exists" || head == "imply" || head == "=" ||
        head == "decrease" || head == "assign" || head == "scale-up" ||
        head == "scale-down") {
      return malformed(e, head, "'" + head + "' is not allowed in an effect");
    }
    Atom atom = read_atom(e);
    check_atom(e, atom, scope);
    return Effect::make_literal(std::move(atom), false);
  }

  // Fills hierarchy from the items of a (:types ...) section.
  void parse_types(const SExpr& section, TypeHierarchy& hierarchy) const {
    std::vector<std::pair<std::string, const SExpr*>> pending;
    std::vector<std::string> implicit_parents;
    auto declare = [&](const std::string& parent) {
      for (const auto& [name, at] : pending) {
        if (name == kRootType) continue;
        if (hierarchy.contains(name)) {
          if (strict()) fail(*at, "type '" + name + "' declared twice");
          continue;
        }
        if (!is_identifier(name) || is_reserved_word(name)) {
          fail(*at, "'" + name + "' is not a valid type name");
        }
        hierarchy.add(name, parent);
      }
      pending.clear();
    };
    for (size_t i = 1; i < section.items.size(); ++i) {
      const SExpr& item = section.items[i];
      if (item.is_symbol("-")) {
        if (i + 1 >= section.items.size()) fail(item, "missing type after '-'");
        const SExpr& parent = section.items[i + 1];
        if (parent.head_is("either")) {
          fail(parent, "'either' types are not supported");
        }
        const std::string& pname = expect_symbol(parent, "a parent type");
        if (pending.empty()) fail(item, "parent given without any types");
        declare(pname);
        if (pname != kRootType) implicit_parents.push_back(pname);
        ++i;
        continue;
      }
      pending.emplace_back(expect_symbol(item, "a type name"), &item);
    }
    declare(std::string(kRootType));
    for (const auto& p : implicit_parents) {
      if (!hierarchy.contains(p)) {
        if (!is_identifier(p)) fail(section, "'" + p + "' is not a valid type name");
        hierarchy.add(p);
      }
    }
    // A comment is a type's description when it is the only type named on
    // that line.
    std::map<int, std::vector<std::string>> by_line;
    for (size_t i = 1; i < section.items.size(); ++i) {
      const SExpr& item = section.items[i];
      if (item.is_symbol("-")) {
        ++i;
        continue;
      }
      if (item.is_symbol() && item.symbol != kRootType) {
        by_line[item.pos.line].push_back(item.symbol);
      }
    }
    for (const auto& [line, names] : by_line) {
      const std::string* comment = doc_.comment_on(line);
      if (comment != nullptr && names.size() == 1 &&
          hierarchy.contains(names.front())) {
        hierarchy.set_description(names.front(), *comment);
      }
    }
    if (strict()) {
      if (auto err = hierarchy.tree_error()) fail(section, *err);
    }
  }

  PredicateDecl parse_predicate(const SExpr& e) const {
    expect_list(e, "a predicate declaration");
    if (e.items.empty()) fail(e, "empty predicate declaration");
    PredicateDecl decl;
    decl.name = expect_symbol(e.items.front(), "a predicate name");
    if (strict() && (!is_identifier(decl.name) || is_reserved_word(decl.name))) {
      fail(e, "'" + decl.name + "' is not a valid predicate name");
    }
    decl.params = parse_typed_list(e, true, 1);
    if (const std::string* c = doc_.comment_on(e.end.line)) {
      decl.description = *c;
    }
    return decl;
  }

  std::vector<PredicateDecl> parse_predicates(const SExpr& section,
                                              size_t first) const {
    std::vector<PredicateDecl> out;
    for (size_t i = first; i < section.items.size(); ++i) {
      PredicateDecl decl = parse_predicate(section.items[i]);
      if (strict()) {
        for (const auto& existing : out) {
          if (existing.name == decl.name) {
            fail(section.items[i],
                 "predicate '" + decl.name + "' declared twice");
          }
        }
      }
      out.push_back(std::move(decl));
    }
    return out;
  }

  void parse_functions(const SExpr& section) const {
    for (size_t i = 1; i < section.items.size(); ++i) {
      const SExpr& item = section.items[i];
      if (item.is_list() && item.items.size() == 1 &&
          item.items[0].is_symbol("total-cost")) {
        continue;
      }
      if (item.is_symbol("-") && i + 1 < section.items.size() &&
          section.items[i + 1].is_symbol("number")) {
        ++i;
        continue;
      }
      fail(item, "only the total-cost function is supported",
           "remove numeric fluents");
    }
  }

  ActionSchema parse_action(const SExpr& e) const {
    if (e.items.size() < 2 || !e.items[1].is_symbol()) {
      fail(e, "action needs a name");
    }
    ActionSchema action;
    action.name = e.items[1].symbol;
    if (strict() && (!is_identifier(action.name) || is_reserved_word(action.name))) {
      fail(e.items[1], "'" + action.name + "' is not a valid action name");
    }
    if (const std::string* c = doc_.comment_on(e.items[1].pos.line)) {
      action.description = *c;
    }
    const SExpr* params = nullptr;
    const SExpr* pre = nullptr;
    const SExpr* eff = nullptr;
    for (size_t i = 2; i < e.items.size(); i += 2) {
      const SExpr& key = e.items[i];
      if (!key.is_symbol() || !is_keyword_symbol(key.symbol)) {
        fail(key, "expected :parameters, :precondition or :effect");
      }
      if (i + 1 >= e.items.size()) fail(key, "missing value after " + key.symbol);
      const SExpr* value = &e.items[i + 1];
      const SExpr** slot = nullptr;
      if (key.symbol == ":parameters") slot = &params;
      else if (key.symbol == ":precondition") slot = &pre;
      else if (key.symbol == ":effect") slot = &eff;
      else fail(key, "unknown action keyword '" + key.symbol + "'",
                "use :parameters, :precondition and :effect");
      if (*slot != nullptr) fail(key, "duplicate " + key.symbol);
      *slot = value;
    }
    TermScope scope;
    if (params != nullptr) action.params = parse_typed_list(*params, true);
    scope.vars = action.params;
    action.precondition =
        pre != nullptr ? parse_formula(*pre, scope) : Formula::make_and();
    action.effect = eff != nullptr ? parse_effect(*eff, scope) : Effect::make_and();
    return action;
  }

 private:
  ParseMode mode_;
  const SExprDocument& doc_;
  const DomainSpec* domain_ = nullptr;
};

const SExpr& single_define(const SExprDocument& doc, const char* what) {
  if (doc.exprs.size() != 1 || !doc.exprs[0].head_is("define")) {
    SourcePos pos = doc.exprs.empty() ? SourcePos{} : doc.exprs[0].pos;
    throw ParseError(pos, std::string("expected a single (define (") + what +
                              " ...) ...) form");
  }
  return doc.exprs[0];
}

std::string define_name(const Parser& p, const SExpr& def, const char* what) {
  if (def.items.size() < 2 || !def.items[1].head_is(what) ||
      def.items[1].items.size() != 2 || !def.items[1].items[1].is_symbol()) {
    p.fail(def, std::string("expected (") + what + " <name>)");
  }
  return def.items[1].items[1].symbol;
}

}  // namespace

DomainSpec parse_domain(std::string_view text, ParseMode mode) {
  SExprDocument doc = read_sexprs(text);
  const SExpr& def = single_define(doc, "domain");
  Parser p(mode, doc);
  DomainSpec domain;
  domain.name = define_name(p, def, "domain");

  const SExpr* types = nullptr;
  const SExpr* predicates = nullptr;
  std::vector<const SExpr*> actions;
  for (size_t i = 2; i < def.items.size(); ++i) {
    const SExpr& section = def.items[i];
    const std::string& head = section.head();
    if (head == ":requirements") {
      for (size_t k = 1; k < section.items.size(); ++k) {
        if (!section.items[k].is_symbol() ||
            !is_keyword_symbol(section.items[k].symbol)) {
          p.fail(section.items[k], "malformed requirement");
        }
      }
    } else if (head == ":types") {
      if (types != nullptr) p.fail(section, "duplicate :types section");
      types = &section;
    } else if (head == ":predicates") {
      if (predicates != nullptr) p.fail(section, "duplicate :predicates section");
      predicates = &section;
    } else if (head == ":functions") {
      p.parse_functions(section);
    } else if (head == ":action") {
      actions.push_back(&section);
    } else if (head == ":constants") {
      p.fail(section, ":constants is not supported",
             "declare objects in the problem instead");
    } else {
      p.fail(section, "unknown domain section '" + head + "'");
    }
  }
  if (types != nullptr) p.parse_types(*types, domain.hierarchy);
  p.set_domain(&domain);
  if (predicates != nullptr) domain.predicates = p.parse_predicates(*predicates, 1);
  for (const SExpr* a : actions) {
    ActionSchema action = p.parse_action(*a);
    if (p.strict()) {
      if (domain.find_action(action.name) != nullptr) {
        p.fail(*a, "action '" + action.name + "' declared twice");
      }
      if (domain.find_predicate(action.name) != nullptr) {
        p.fail(*a, "action '" + action.name + "' has the same name as a "
                   "predicate");
      }
    }
    domain.actions.push_back(std::move(action));
  }
  return domain;
}

ProblemSpec parse_problem(std::string_view text, const DomainSpec& domain,
                          ParseMode mode) {
  SExprDocument doc = read_sexprs(text);
  const SExpr& def = single_define(doc, "problem");
  Parser p(mode, doc);
  p.set_domain(&domain);
  ProblemSpec problem;
  problem.name = define_name(p, def, "problem");
  problem.goal = Formula::make_and();

  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  for (size_t i = 2; i < def.items.size(); ++i) {
    const SExpr& section = def.items[i];
    const std::string& head = section.head();
    if (head == ":domain") {
      if (section.items.size() != 2 || !section.items[1].is_symbol()) {
        p.fail(section, "expected (:domain <name>)");
      }
      problem.domain_name = section.items[1].symbol;
      if (p.strict() && problem.domain_name != domain.name) {
        p.fail(section, "problem is for domain '" + problem.domain_name +
                            "' but the domain is '" + domain.name + "'");
      }
    } else if (head == ":objects") {
      problem.objects = p.parse_typed_list(section, false, 1);
      if (p.strict()) {
        for (size_t k = 1; k < section.items.size(); ++k) {
          const SExpr& item = section.items[k];
          if (item.is_symbol("-")) {
            ++k;
            continue;
          }
          if (domain.hierarchy.contains(item.symbol)) {
            p.fail(item, "object '" + item.symbol + "' has the same name as a "
                                                     "type");
          }
          if (is_reserved_word(item.symbol)) {
            p.fail(item, "'" + item.symbol + "' is a reserved word");
          }
        }
      }
    } else if (head == ":init") {
      init = &section;
    } else if (head == ":goal") {
      if (section.items.size() != 2) p.fail(section, "expected (:goal <formula>)");
      goal = &section.items[1];
    } else if (head == ":metric") {
      if (section.items.size() != 3 || !section.items[1].is_symbol("minimize") ||
          !section.items[2].is_list() || section.items[2].items.size() != 1 ||
          !section.items[2].items[0].is_symbol("total-cost")) {
        p.fail(section, "only (:metric minimize (total-cost)) is supported");
      }
    } else {
      p.fail(section, "unknown problem section '" + head + "'");
    }
  }

  TermScope scope;
  scope.objects = &problem.objects;
  if (init != nullptr) {
    for (size_t k = 1; k < init->items.size(); ++k) {
      const SExpr& entry = init->items[k];
      p.expect_list(entry, "an initial-state atom");
      if (entry.head_is("=")) {
        if (entry.items.size() == 3 && entry.items[1].is_list() &&
            entry.items[1].items.size() == 1 &&
            entry.items[1].items[0].is_symbol("total-cost") &&
            entry.items[2].is_symbol()) {
          if (auto v = parse_nonnegative(entry.items[2].symbol)) {
            problem.initial_cost = *v;
            continue;
          }
        }
        p.fail(entry, "only (= (total-cost) N) is supported in :init");
      }
      if (entry.head_is("not")) {
        p.fail(entry, "negated atoms are not allowed in :init",
               "omit atoms that are false initially");
      }
      Formula f = p.parse_formula(entry, scope);
      if (f.kind != Formula::Kind::Atom) {
        p.fail(entry, "only atoms are allowed in :init");
      }
      for (const auto& arg : f.atom.args) {
        if (is_variable(arg)) p.fail(entry, "variable '" + arg + "' in :init");
      }
      problem.init.push_back(std::move(f.atom));
    }
  }
  if (goal != nullptr) {
    problem.goal = p.parse_formula(*goal, scope);
  } else if (p.strict()) {
    p.fail(def, "missing :goal section");
  }
  return problem;
}

ActionDraft parse_action_draft(std::string_view text, std::string_view name) {
  SExprDocument doc = read_sexprs(text);
  Parser p(ParseMode::Lenient, doc);
  ActionDraft draft;
  draft.action.name = to_lower(name);
  draft.action.precondition = Formula::make_and();
  draft.action.effect = Effect::make_and();

  std::vector<const SExpr*> items;
  if (doc.exprs.size() == 1 && doc.exprs[0].head_is(":action")) {
    const SExpr& wrapped = doc.exprs[0];
    for (size_t i = 2; i < wrapped.items.size(); ++i) {
      items.push_back(&wrapped.items[i]);
    }
  } else {
    for (const auto& e : doc.exprs) items.push_back(&e);
  }

  bool seen_params = false;
  bool seen_pre = false;
  bool seen_eff = false;
  bool in_new_predicates = false;
  for (size_t i = 0; i < items.size(); ++i) {
    const SExpr& item = *items[i];
    if (item.is_symbol() && is_keyword_symbol(item.symbol)) {
      const std::string& key = item.symbol;
      in_new_predicates = false;
      bool* seen = nullptr;
      if (key == ":parameters") seen = &seen_params;
      else if (key == ":precondition") seen = &seen_pre;
      else if (key == ":effect") seen = &seen_eff;
      if (key == ":new-predicates" || key == ":new_predicates") {
        in_new_predicates = true;
        continue;
      }
      if (seen == nullptr) {
        draft.section_issues.push_back({key, "unknown section keyword"});
        // Skip the value that belongs to the unknown keyword.
        if (i + 1 < items.size() && items[i + 1]->is_list()) ++i;
        continue;
      }
      if (i + 1 >= items.size() || !items[i + 1]->is_list()) {
        throw ParseError(item.pos, "missing value after " + key);
      }
      const SExpr& value = *items[++i];
      if (*seen) {
        draft.section_issues.push_back({key, "section given more than once"});
        continue;
      }
      *seen = true;
      TermScope scope;
      if (key == ":parameters") {
        draft.action.params = p.parse_typed_list(value, true);
      } else if (key == ":precondition") {
        draft.action.precondition = p.parse_formula(value, scope);
      } else {
        draft.action.effect = p.parse_effect(value, scope);
      }
      continue;
    }
    if (in_new_predicates && item.is_list()) {
      draft.new_predicates.push_back(p.parse_predicate(item));
      continue;
    }
    throw ParseError(item.pos, "unexpected '" + item.to_string() +
                                   "' in action block",
                     "start each section with :parameters, :precondition, "
                     ":effect or :new-predicates");
  }
  if (!seen_eff) {
    throw ParseError(SourcePos{}, "action block has no :effect section",
                     "add an :effect section");
  }
  return draft;
}

TaskDraft parse_task_draft(std::string_view text) {
  SExprDocument doc = read_sexprs(text);
  Parser p(ParseMode::Lenient, doc);
  TaskDraft draft;
  draft.goal = Formula::make_and();

  std::vector<const SExpr*> sections;
  if (doc.exprs.size() == 1 && doc.exprs[0].head_is("define")) {
    for (size_t i = 2; i < doc.exprs[0].items.size(); ++i) {
      sections.push_back(&doc.exprs[0].items[i]);
    }
  } else {
    for (const auto& e : doc.exprs) sections.push_back(&e);
  }
  bool have_goal = false;
  for (const SExpr* s : sections) {
    const std::string& head = s->head();
    if (head == ":objects") {
      draft.objects = p.parse_typed_list(*s, false, 1);
    } else if (head == ":init") {
      TermScope scope;
      for (size_t k = 1; k < s->items.size(); ++k) {
        const SExpr& entry = s->items[k];
        if (entry.head_is("=") && entry.items.size() == 3 &&
            entry.items[1].is_list() && entry.items[1].items.size() == 1 &&
            entry.items[1].items[0].is_symbol("total-cost") &&
            entry.items[2].is_symbol()) {
          if (auto v = parse_nonnegative(entry.items[2].symbol)) {
            draft.initial_cost = *v;
            continue;
          }
        }
        draft.init.push_back(p.parse_formula(entry, scope));
      }
    } else if (head == ":goal") {
      if (s->items.size() != 2) p.fail(*s, "expected (:goal <formula>)");
      TermScope scope;
      draft.goal = p.parse_formula(s->items[1], scope);
      have_goal = true;
    } else if (head == ":domain" || head == ":metric") {
      continue;
    } else {
      p.fail(*s, "unexpected section '" + s->to_string().substr(0, 40) +
                     "' in task block",
             "give only :objects, :init and :goal");
    }
  }
  if (!have_goal) {
    throw ParseError(SourcePos{}, "task block has no :goal section",
                     "add a (:goal ...) section");
  }
  return draft;
}

Plan parse_plan(std::string_view text) {
  Plan plan;
  bool explicit_cost = false;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                        : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    size_t semi = line.find(';');
    if (semi != std::string_view::npos) {
      std::string comment = to_lower(line.substr(semi + 1));
      size_t cpos = comment.find("cost");
      size_t eq = comment.find('=', cpos == std::string::npos ? 0 : cpos);
      if (cpos != std::string::npos && eq != std::string::npos) {
        std::string digits;
        for (char c : comment.substr(eq + 1)) {
          if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
          else if (!digits.empty()) break;
        }
        if (!digits.empty()) {
          plan.cost = std::stol(digits);
          explicit_cost = true;
        }
      }
      line = line.substr(0, semi);
    }
    size_t open = line.find('(');
    if (open == std::string_view::npos) {
      if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
        throw ParseError({static_cast<int>(line_no), 1},
                         "plan line is not an action");
      }
      continue;
    }
    SExprDocument doc = read_sexprs(line.substr(open));
    if (doc.exprs.size() != 1 || !doc.exprs[0].is_list() ||
        doc.exprs[0].items.empty()) {
      throw ParseError({static_cast<int>(line_no), static_cast<int>(open) + 1},
                       "malformed plan step");
    }
    PlanStep step;
    for (size_t i = 0; i < doc.exprs[0].items.size(); ++i) {
      const SExpr& item = doc.exprs[0].items[i];
      if (!item.is_symbol()) {
        throw ParseError({static_cast<int>(line_no), item.pos.column},
                         "plan step arguments must be object names");
      }
      if (i == 0) step.action = item.symbol;
      else step.args.push_back(item.symbol);
    }
    plan.steps.push_back(std::move(step));
  }
  if (!explicit_cost) plan.cost = static_cast<long>(plan.steps.size());
  return plan;
}

Formula parse_formula(std::string_view text) {
  SExprDocument doc = read_sexprs(text);
  if (doc.exprs.size() != 1) {
    throw ParseError(SourcePos{}, "expected exactly one formula");
  }
  Parser p(ParseMode::Lenient, doc);
  TermScope scope;
  return p.parse_formula(doc.exprs[0], scope);
}

}  // namespace nl2plan::pddl
