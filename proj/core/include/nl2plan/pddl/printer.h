#ifndef NL2PLAN_PDDL_PRINTER_H
#define NL2PLAN_PDDL_PRINTER_H

#include <string>
#include <string_view>

#include "nl2plan/pddl/model.h"

namespace nl2plan::pddl {

// Canonical multi-line PDDL: 2-space indentation, lowercase keywords, the
// fixed requirement list, descriptions as trailing `;` comments. Printing
// is deterministic and parse(print(x)) == x for any parsed value.
std::string print_domain(const DomainSpec& domain);
std::string print_problem(const ProblemSpec& problem);

// Single-line renderings.
std::string print_atom(const Atom& atom);
std::string print_formula(const Formula& formula);
std::string print_effect(const Effect& effect);
std::string print_typed_list(const TypedList& list);
std::string print_predicate(const PredicateDecl& predicate);

// The `action` block grammar read by parse_action_draft.
std::string print_action_block(const ActionDraft& draft);
// The `task` block grammar read by parse_task_draft.
std::string print_task_block(const TaskDraft& draft);

// One `(name args...)` line per step and a final `; cost = N` line.
std::string print_plan(const Plan& plan);

// Collapses whitespace (including newlines) so text fits a `;` comment.
std::string single_line(std::string_view text);

}  // namespace nl2plan::pddl

#endif
