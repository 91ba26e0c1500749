#ifndef NL2PLAN_PLANNER_PLAN_CHECK_H
#define NL2PLAN_PLANNER_PLAN_CHECK_H

#include <string>

#include "nl2plan/pddl/model.h"

namespace nl2plan::planner {

struct PlanCheck {
  bool valid = false;
  size_t steps_applied = 0;
  bool goal_reached = false;
  long cost = 0;
  std::string error;
};

// Simulates the plan on the lifted model, without grounding: each step's
// precondition is evaluated directly on the current set of atoms.
PlanCheck validate_plan(const pddl::DomainSpec& domain,
                        const pddl::ProblemSpec& problem,
                        const pddl::Plan& plan);

}  // namespace nl2plan::planner

#endif
