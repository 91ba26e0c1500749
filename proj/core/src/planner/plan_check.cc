#include "nl2plan/planner/plan_check.h"

#include <map>
#include <set>

#include "nl2plan/pddl/printer.h"

namespace nl2plan::planner {

namespace {

using pddl::Atom;
using pddl::Effect;
using pddl::Formula;
using Binding = std::map<std::string, std::string>;

class Simulator {
 public:
  Simulator(const pddl::DomainSpec& domain, const pddl::ProblemSpec& problem)
      : domain_(domain), problem_(problem),
        state_(problem.init.begin(), problem.init.end()) {}

  PlanCheck run(const pddl::Plan& plan) {
    PlanCheck out;
    for (const auto& step : plan.steps) {
      std::string error = apply(step, out.cost);
      if (!error.empty()) {
        out.error = "step " + std::to_string(out.steps_applied + 1) + " " +
                    describe(step) + ": " + error;
        return out;
      }
      ++out.steps_applied;
    }
    out.goal_reached = holds(problem_.goal, {});
    out.valid = out.goal_reached;
    if (!out.goal_reached) out.error = "goal not satisfied after the last step";
    return out;
  }

 private:
  static std::string describe(const pddl::PlanStep& step) {
    return pddl::print_atom({step.action, step.args});
  }

  std::string type_of(const std::string& object) const {
    const pddl::TypedName* o = problem_.find_object(object);
    if (o == nullptr) return {};
    return o->type.empty() ? std::string(pddl::kRootType) : o->type;
  }

  bool has_type(const std::string& object, const std::string& type) const {
    std::string t = type_of(object);
    if (t.empty()) return false;
    return domain_.hierarchy.is_subtype(
        t, type.empty() ? std::string(pddl::kRootType) : type);
  }

  std::vector<std::string> objects_of(const std::string& type) const {
    std::vector<std::string> out;
    for (const auto& o : problem_.objects) {
      if (has_type(o.name, type)) out.push_back(o.name);
    }
    return out;
  }

  static Atom bind(const Atom& atom, const Binding& b) {
    Atom out{atom.predicate, {}};
    for (const auto& a : atom.args) {
      auto it = b.find(a);
      out.args.push_back(it == b.end() ? a : it->second);
    }
    return out;
  }

  // Calls f for every extension of b over vars; stops when f returns true.
  template <typename F>
  bool any_binding(const pddl::TypedList& vars, size_t i, Binding& b, F&& f) const {
    if (i == vars.size()) return f(b);
    for (const auto& o : objects_of(vars[i].type)) {
      b[vars[i].name] = o;
      if (any_binding(vars, i + 1, b, f)) return true;
    }
    b.erase(vars[i].name);
    return false;
  }

  bool holds(const Formula& f, Binding b) const {
    switch (f.kind) {
      case Formula::Kind::Atom:
        return state_.count(bind(f.atom, b)) > 0;
      case Formula::Kind::Equal: {
        Atom a = bind(f.atom, b);
        return a.args.at(0) == a.args.at(1);
      }
      case Formula::Kind::Not:
        return !holds(f.children.at(0), b);
      case Formula::Kind::And:
        for (const auto& c : f.children) {
          if (!holds(c, b)) return false;
        }
        return true;
      case Formula::Kind::Or:
        for (const auto& c : f.children) {
          if (holds(c, b)) return true;
        }
        return false;
      case Formula::Kind::Imply:
        return !holds(f.children.at(0), b) || holds(f.children.at(1), b);
      case Formula::Kind::Exists:
        return any_binding(f.vars, 0, b, [&](const Binding& nb) {
          return holds(f.children.at(0), nb);
        });
      case Formula::Kind::Forall:
        return !any_binding(f.vars, 0, b, [&](const Binding& nb) {
          return !holds(f.children.at(0), nb);
        });
    }
    return false;
  }

  // Effects are read against the state before the step.
  void collect(const Effect& e, Binding b, std::vector<Atom>& adds,
               std::vector<Atom>& dels, long& cost) const {
    switch (e.kind) {
      case Effect::Kind::Literal:
        (e.negated ? dels : adds).push_back(bind(e.atom, b));
        return;
      case Effect::Kind::IncreaseCost:
        cost += e.amount;
        return;
      case Effect::Kind::And:
        for (const auto& c : e.children) collect(c, b, adds, dels, cost);
        return;
      case Effect::Kind::Forall:
        any_binding(e.vars, 0, b, [&](const Binding& nb) {
          collect(e.children.at(0), nb, adds, dels, cost);
          return false;
        });
        return;
      case Effect::Kind::When:
        if (holds(e.condition, b)) collect(e.children.at(0), b, adds, dels, cost);
        return;
      case Effect::Kind::Malformed:
        throw std::invalid_argument("malformed effect " + e.raw);
    }
  }

  std::string apply(const pddl::PlanStep& step, long& total_cost) {
    const pddl::ActionSchema* action = domain_.find_action(step.action);
    if (action == nullptr) return "unknown action";
    if (action->params.size() != step.args.size()) {
      return "expects " + std::to_string(action->params.size()) + " arguments";
    }
    Binding b;
    for (size_t i = 0; i < step.args.size(); ++i) {
      if (type_of(step.args[i]).empty()) {
        return "unknown object " + step.args[i];
      }
      if (!has_type(step.args[i], action->params[i].type)) {
        return step.args[i] + " is not of type " + action->params[i].type;
      }
      b[action->params[i].name] = step.args[i];
    }
    if (!holds(action->precondition, b)) return "precondition not satisfied";
    std::vector<Atom> adds;
    std::vector<Atom> dels;
    long cost = 0;
    collect(action->effect, b, adds, dels, cost);
    for (const auto& a : dels) state_.erase(a);
    for (const auto& a : adds) state_.insert(a);
    total_cost += domain_.uses_action_costs() ? cost : 1;
    return {};
  }

  const pddl::DomainSpec& domain_;
  const pddl::ProblemSpec& problem_;
  std::set<Atom> state_;
};

}  // namespace

PlanCheck validate_plan(const pddl::DomainSpec& domain,
                        const pddl::ProblemSpec& problem,
                        const pddl::Plan& plan) {
  return Simulator(domain, problem).run(plan);
}

}  // namespace nl2plan::planner
