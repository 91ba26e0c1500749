#ifndef NL2PLAN_TESTS_LIFTED_ORACLE_H
#define NL2PLAN_TESTS_LIFTED_ORACLE_H

#include <optional>
#include <set>
#include <vector>

#include "nl2plan/pddl/model.h"

namespace nl2plan::testing {

// Explicit-state reference semantics, written without the planner's
// grounding so that planner results can be checked against it.
using AtomSet = std::set<pddl::Atom>;

struct OracleStep {
  pddl::PlanStep step;
  long cost;
  AtomSet next;
};

AtomSet initial_atoms(const pddl::ProblemSpec& problem);
bool oracle_goal(const pddl::DomainSpec& domain, const pddl::ProblemSpec& problem,
                 const AtomSet& state);
std::vector<OracleStep> oracle_successors(const pddl::DomainSpec& domain,
                                          const pddl::ProblemSpec& problem,
                                          const AtomSet& state);

struct OracleOptimum {
  bool exhausted = false;  // false when the state cap was hit
  size_t reachable = 0;
  std::optional<long> cost;    // cheapest plan cost
  std::optional<long> length;  // fewest steps
};

// Dijkstra over costs and breadth-first over steps, up to `state_cap`
// distinct states.
OracleOptimum oracle_optimum(const pddl::DomainSpec& domain,
                             const pddl::ProblemSpec& problem, size_t state_cap);

// Length of the shortest plan in the delete-free relaxation from `state`.
std::optional<long> oracle_relaxed_length(const pddl::DomainSpec& domain,
                                          const pddl::ProblemSpec& problem,
                                          const AtomSet& state);

}  // namespace nl2plan::testing

#endif
