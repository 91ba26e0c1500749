#ifndef NL2PLAN_PLANNER_TASK_H
#define NL2PLAN_PLANNER_TASK_H

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2plan/pddl/model.h"

namespace nl2plan::planner {

using FactId = int;

// Packed set of true facts.
class State {
 public:
  State() = default;
  explicit State(size_t num_facts) : words_((num_facts + 63) / 64, 0) {}

  bool test(FactId f) const {
    return (words_[static_cast<size_t>(f) >> 6] >> (f & 63)) & 1U;
  }
  void set(FactId f) { words_[static_cast<size_t>(f) >> 6] |= bit(f); }
  void reset(FactId f) { words_[static_cast<size_t>(f) >> 6] &= ~bit(f); }

  const std::vector<uint64_t>& words() const { return words_; }
  bool operator==(const State&) const = default;

 private:
  static uint64_t bit(FactId f) { return uint64_t{1} << (f & 63); }
  std::vector<uint64_t> words_;
};

struct StateHash {
  size_t operator()(const State& s) const;
};

// A conjunction of fact literals.
struct Condition {
  std::vector<FactId> pos;
  std::vector<FactId> neg;

  bool holds(const State& s) const;
};

struct ConditionalEffect {
  Condition condition;
  std::vector<FactId> add;
  std::vector<FactId> del;
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  Condition pre;
  std::vector<FactId> add;
  std::vector<FactId> del;
  std::vector<ConditionalEffect> conditional;
  long cost = 1;
};

// Propositional task. Static atoms and equalities are folded away during
// grounding; a precondition with disjunctions becomes one ground action per
// disjunct, and the goal is kept as a list of alternative conjunctions.
struct GroundTask {
  std::vector<pddl::Atom> facts;
  std::map<pddl::Atom, FactId> fact_ids;
  std::vector<GroundAction> actions;
  State init;
  std::vector<Condition> goals;
  bool unit_cost = true;

  bool is_goal(const State& s) const;
  bool applicable(const GroundAction& a, const State& s) const {
    return a.pre.holds(s);
  }
  // Conditional effects are evaluated in `s`; deletes are applied before
  // adds, so an atom both added and deleted ends up true.
  State successor(const State& s, const GroundAction& a) const;
  std::string fact_name(FactId f) const;
};

// Thrown when grounding would exceed the configured size.
class GroundingLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundingLimits {
  size_t max_ground_actions = 2'000'000;
  size_t max_disjuncts = 4096;
};

// Expects a domain and problem that passed strict parsing.
GroundTask ground(const pddl::DomainSpec& domain,
                  const pddl::ProblemSpec& problem,
                  const GroundingLimits& limits = {});

}  // namespace nl2plan::planner

#endif
