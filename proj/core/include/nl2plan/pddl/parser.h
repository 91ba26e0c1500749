#ifndef NL2PLAN_PDDL_PARSER_H
#define NL2PLAN_PDDL_PARSER_H

#include <string_view>

#include "nl2plan/pddl/model.h"
#include "nl2plan/pddl/sexpr.h"

namespace nl2plan::pddl {

// Strict parsing enforces every model invariant and fails on the first
// violation. Lenient parsing only requires well-formed syntax, so flawed
// LLM output can be stored, printed and re-read.
enum class ParseMode { Strict, Lenient };

DomainSpec parse_domain(std::string_view text,
                        ParseMode mode = ParseMode::Strict);

ProblemSpec parse_problem(std::string_view text, const DomainSpec& domain,
                          ParseMode mode = ParseMode::Strict);

// Body of an `action` block:
//   :parameters (...) :precondition (...) :effect (...)
//   :new-predicates (p ?x - t) ; description ...
// A wrapping `(:action name ...)` form is also accepted.
ActionDraft parse_action_draft(std::string_view text, std::string_view name);

// Body of a `task` block: `(:objects ...) (:init ...) (:goal ...)`, or a full
// `(define (problem ...) ...)` form.
TaskDraft parse_task_draft(std::string_view text);

// One step per line, `(action arg ...)`, optionally preceded by a step
// label such as `3:`. A `; cost = N` line sets the cost.
Plan parse_plan(std::string_view text);

// Lenient single formula, e.g. a goal typed by a user.
Formula parse_formula(std::string_view text);

}  // namespace nl2plan::pddl

#endif
