#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <unordered_map>

#include "nl2plan/planner/task.h"

namespace nl2plan::planner {

namespace {

using pddl::Atom;
using pddl::Effect;
using pddl::Formula;

struct Literal {
  FactId fact;
  bool negated;

  auto operator<=>(const Literal&) const = default;
};

// A disjunction of conjunctions. {} is false, {{}} is true.
using Conjunction = std::vector<Literal>;
using Dnf = std::vector<Conjunction>;
using Binding = std::unordered_map<std::string, std::string>;

// Sorts, removes duplicates and reports whether the conjunction is
// satisfiable.
bool normalize(Conjunction& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (size_t i = 1; i < c.size(); ++i) {
    if (c[i].fact == c[i - 1].fact) return false;
  }
  return true;
}

class Grounder {
 public:
  Grounder(const pddl::DomainSpec& domain, const pddl::ProblemSpec& problem,
           const GroundingLimits& limits)
      : domain_(domain), problem_(problem), limits_(limits) {
    for (const auto& a : domain_.actions) collect_fluents(a.effect);
    for (const auto& atom : problem_.init) {
      if (fluent_.count(atom.predicate) > 0) {
        intern(atom);
      } else {
        static_true_.insert(atom);
      }
    }
  }

  GroundTask run() {
    task_.unit_cost = !domain_.uses_action_costs();
    for (const auto& schema : domain_.actions) ground_schema(schema);
    Binding empty;
    for (auto& c : to_dnf(problem_.goal, empty, false)) {
      task_.goals.push_back(to_condition(c));
    }
    task_.init = State(task_.facts.size());
    for (const auto& atom : problem_.init) {
      auto it = task_.fact_ids.find(atom);
      if (it != task_.fact_ids.end()) task_.init.set(it->second);
    }
    prune_unreachable();
    return std::move(task_);
  }

 private:
  void collect_fluents(const Effect& e) {
    if (e.kind == Effect::Kind::Literal) fluent_.insert(e.atom.predicate);
    for (const auto& c : e.children) collect_fluents(c);
  }

  FactId intern(const Atom& atom) {
    auto [it, inserted] = task_.fact_ids.emplace(
        atom, static_cast<FactId>(task_.facts.size()));
    if (inserted) task_.facts.push_back(atom);
    return it->second;
  }

  const std::vector<std::string>& objects_of(const std::string& type) {
    auto it = objects_by_type_.find(type);
    if (it != objects_by_type_.end()) return it->second;
    std::vector<std::string> out;
    const std::string wanted = type.empty() ? std::string(pddl::kRootType) : type;
    for (const auto& o : problem_.objects) {
      const std::string t = o.type.empty() ? std::string(pddl::kRootType) : o.type;
      if (domain_.hierarchy.is_subtype(t, wanted)) out.push_back(o.name);
    }
    return objects_by_type_.emplace(type, std::move(out)).first->second;
  }

  Atom substitute(const Atom& atom, const Binding& b) const {
    Atom out{atom.predicate, {}};
    out.args.reserve(atom.args.size());
    for (const auto& a : atom.args) {
      auto it = b.find(a);
      out.args.push_back(it == b.end() ? a : it->second);
    }
    return out;
  }

  Dnf product(const Dnf& lhs, const Dnf& rhs) const {
    Dnf out;
    for (const auto& l : lhs) {
      for (const auto& r : rhs) {
        Conjunction c = l;
        c.insert(c.end(), r.begin(), r.end());
        if (normalize(c)) out.push_back(std::move(c));
        if (out.size() > limits_.max_disjuncts) {
          throw GroundingLimitError("disjunctive normal form exceeds " +
                                    std::to_string(limits_.max_disjuncts) +
                                    " disjuncts");
        }
      }
    }
    return out;
  }

  // Combines parts with `and` when conjunctive, otherwise with `or`.
  Dnf combine(std::vector<Dnf> parts, bool conjunctive) const {
    if (conjunctive) {
      Dnf acc = {{}};
      for (const auto& p : parts) {
        acc = product(acc, p);
        if (acc.empty()) break;
      }
      return acc;
    }
    Dnf acc;
    for (auto& p : parts) {
      for (auto& c : p) acc.push_back(std::move(c));
    }
    if (acc.size() > limits_.max_disjuncts) {
      throw GroundingLimitError("disjunctive normal form exceeds " +
                                std::to_string(limits_.max_disjuncts) +
                                " disjuncts");
    }
    return acc;
  }

  // Every assignment of the quantified variables, added to `base`.
  std::vector<Binding> expand(const pddl::TypedList& vars, const Binding& base) {
    std::vector<Binding> out = {base};
    for (const auto& v : vars) {
      std::vector<Binding> next;
      for (const auto& b : out) {
        for (const auto& o : objects_of(v.type)) {
          Binding nb = b;
          nb[v.name] = o;
          next.push_back(std::move(nb));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  Dnf to_dnf(const Formula& f, const Binding& b, bool negated) {
    switch (f.kind) {
      case Formula::Kind::Atom: {
        Atom atom = substitute(f.atom, b);
        if (fluent_.count(atom.predicate) == 0) {
          bool value = static_true_.count(atom) > 0;
          return value != negated ? Dnf{{}} : Dnf{};
        }
        return Dnf{{Literal{intern(atom), negated}}};
      }
      case Formula::Kind::Equal: {
        Atom atom = substitute(f.atom, b);
        bool value = atom.args.at(0) == atom.args.at(1);
        return value != negated ? Dnf{{}} : Dnf{};
      }
      case Formula::Kind::Not:
        return to_dnf(f.children.at(0), b, !negated);
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        std::vector<Dnf> parts;
        for (const auto& c : f.children) parts.push_back(to_dnf(c, b, negated));
        bool conjunctive = (f.kind == Formula::Kind::And) != negated;
        return combine(std::move(parts), conjunctive);
      }
      case Formula::Kind::Imply: {
        // a -> c is (not a) or c.
        std::vector<Dnf> parts;
        parts.push_back(to_dnf(f.children.at(0), b, !negated));
        parts.push_back(to_dnf(f.children.at(1), b, negated));
        return combine(std::move(parts), negated);
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        std::vector<Dnf> parts;
        for (const auto& nb : expand(f.vars, b)) {
          parts.push_back(to_dnf(f.children.at(0), nb, negated));
        }
        bool conjunctive = (f.kind == Formula::Kind::Forall) != negated;
        return combine(std::move(parts), conjunctive);
      }
    }
    return {};
  }

  static Condition to_condition(const Conjunction& c) {
    Condition out;
    for (const auto& lit : c) {
      (lit.negated ? out.neg : out.pos).push_back(lit.fact);
    }
    return out;
  }

  struct EffectParts {
    std::vector<FactId> add;
    std::vector<FactId> del;
    std::vector<ConditionalEffect> conditional;
    long cost = 0;
  };

  void collect_effect(const Effect& e, const Binding& b,
                      const Conjunction* context, EffectParts& out) {
    switch (e.kind) {
      case Effect::Kind::Literal: {
        FactId f = intern(substitute(e.atom, b));
        if (context == nullptr || context->empty()) {
          (e.negated ? out.del : out.add).push_back(f);
          return;
        }
        Condition cond = to_condition(*context);
        auto it = std::find_if(out.conditional.begin(), out.conditional.end(),
                               [&](const ConditionalEffect& ce) {
                                 return ce.condition.pos == cond.pos &&
                                        ce.condition.neg == cond.neg;
                               });
        if (it == out.conditional.end()) {
          out.conditional.push_back({std::move(cond), {}, {}});
          it = std::prev(out.conditional.end());
        }
        (e.negated ? it->del : it->add).push_back(f);
        return;
      }
      case Effect::Kind::IncreaseCost:
        if (context != nullptr && !context->empty()) {
          throw std::invalid_argument(
              "cost increases inside conditional effects are not supported");
        }
        out.cost += e.amount;
        return;
      case Effect::Kind::And:
        for (const auto& c : e.children) collect_effect(c, b, context, out);
        return;
      case Effect::Kind::Forall:
        for (const auto& nb : expand(e.vars, b)) {
          collect_effect(e.children.at(0), nb, context, out);
        }
        return;
      case Effect::Kind::When:
        for (const auto& c : to_dnf(e.condition, b, false)) {
          Conjunction merged = c;
          if (context != nullptr) {
            merged.insert(merged.end(), context->begin(), context->end());
          }
          if (!normalize(merged)) continue;
          collect_effect(e.children.at(0), b, &merged, out);
        }
        return;
      case Effect::Kind::Malformed:
        throw std::invalid_argument("cannot ground malformed effect " + e.raw);
    }
  }

  struct StaticCheck {
    Atom atom;
    size_t ready_at;  // parameter index after which all arguments are bound
  };

  std::vector<StaticCheck> static_checks(const pddl::ActionSchema& schema) const {
    std::vector<const Formula*> conjuncts;
    if (schema.precondition.kind == Formula::Kind::And) {
      for (const auto& c : schema.precondition.children) conjuncts.push_back(&c);
    } else {
      conjuncts.push_back(&schema.precondition);
    }
    std::vector<StaticCheck> out;
    for (const Formula* f : conjuncts) {
      if (f->kind != Formula::Kind::Atom ||
          fluent_.count(f->atom.predicate) > 0) {
        continue;
      }
      size_t ready = 0;
      bool usable = true;
      for (const auto& arg : f->atom.args) {
        auto it = std::find_if(schema.params.begin(), schema.params.end(),
                               [&](const auto& p) { return p.name == arg; });
        if (it == schema.params.end()) {
          usable = false;
          break;
        }
        ready = std::max(ready, static_cast<size_t>(it - schema.params.begin()) + 1);
      }
      if (usable) out.push_back({f->atom, ready});
    }
    return out;
  }

  void ground_schema(const pddl::ActionSchema& schema) {
    const std::vector<StaticCheck> checks = static_checks(schema);
    std::vector<const std::vector<std::string>*> domains;
    for (const auto& p : schema.params) domains.push_back(&objects_of(p.type));
    Binding binding;
    std::vector<std::string> args(schema.params.size());

    auto passes = [&](size_t depth) {
      for (const auto& check : checks) {
        if (check.ready_at != depth) continue;
        if (static_true_.count(substitute(check.atom, binding)) == 0) return false;
      }
      return true;
    };

    std::function<void(size_t)> visit = [&](size_t depth) {
      if (!passes(depth)) return;
      if (depth == schema.params.size()) {
        instantiate(schema, binding, args);
        return;
      }
      for (const auto& o : *domains[depth]) {
        binding[schema.params[depth].name] = o;
        args[depth] = o;
        visit(depth + 1);
      }
      binding.erase(schema.params[depth].name);
    };
    visit(0);
  }

  void instantiate(const pddl::ActionSchema& schema, const Binding& binding,
                   const std::vector<std::string>& args) {
    Dnf pre = to_dnf(schema.precondition, binding, false);
    if (pre.empty()) return;
    EffectParts parts;
    collect_effect(schema.effect, binding, nullptr, parts);
    for (const auto& body : pre) {
      GroundAction a;
      a.name = schema.name;
      a.args = args;
      a.pre = to_condition(body);
      a.add = parts.add;
      a.del = parts.del;
      a.conditional = parts.conditional;
      a.cost = task_.unit_cost ? 1 : parts.cost;
      task_.actions.push_back(std::move(a));
      if (task_.actions.size() > limits_.max_ground_actions) {
        throw GroundingLimitError("more than " +
                                  std::to_string(limits_.max_ground_actions) +
                                  " ground actions");
      }
    }
  }

  // Drops actions whose positive preconditions are unreachable even when
  // deletes are ignored.
  void prune_unreachable() {
    std::vector<char> reached(task_.facts.size(), 0);
    for (FactId f = 0; f < static_cast<FactId>(task_.facts.size()); ++f) {
      reached[static_cast<size_t>(f)] = task_.init.test(f) ? 1 : 0;
    }
    auto all_reached = [&](const std::vector<FactId>& fs) {
      return std::all_of(fs.begin(), fs.end(), [&](FactId f) {
        return reached[static_cast<size_t>(f)] != 0;
      });
    };
    std::vector<char> usable(task_.actions.size(), 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < task_.actions.size(); ++i) {
        const GroundAction& a = task_.actions[i];
        if (!all_reached(a.pre.pos)) continue;
        usable[i] = 1;
        auto mark = [&](const std::vector<FactId>& fs) {
          for (FactId f : fs) {
            if (reached[static_cast<size_t>(f)] == 0) {
              reached[static_cast<size_t>(f)] = 1;
              changed = true;
            }
          }
        };
        mark(a.add);
        for (const auto& ce : a.conditional) {
          if (all_reached(ce.condition.pos)) mark(ce.add);
        }
      }
    }
    std::vector<GroundAction> kept;
    for (size_t i = 0; i < task_.actions.size(); ++i) {
      if (usable[i] != 0) kept.push_back(std::move(task_.actions[i]));
    }
    task_.actions = std::move(kept);
  }

  const pddl::DomainSpec& domain_;
  const pddl::ProblemSpec& problem_;
  const GroundingLimits& limits_;
  std::set<std::string> fluent_;
  std::set<Atom> static_true_;
  std::unordered_map<std::string, std::vector<std::string>> objects_by_type_;
  GroundTask task_;
};

}  // namespace

GroundTask ground(const pddl::DomainSpec& domain,
                  const pddl::ProblemSpec& problem,
                  const GroundingLimits& limits) {
  return Grounder(domain, problem, limits).run();
}

}  // namespace nl2plan::planner
