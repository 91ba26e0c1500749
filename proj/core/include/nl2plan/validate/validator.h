#ifndef NL2PLAN_VALIDATE_VALIDATOR_H
#define NL2PLAN_VALIDATE_VALIDATOR_H

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nl2plan/pddl/model.h"

namespace nl2plan::validate {

// Published catalog; see docs/validation-catalog.md. New codes may be
// appended, existing spellings never change.
enum class IssueCode {
  UnknownKeyword,
  MisplacedKeyword,
  MissingType,
  UnknownType,
  UndefinedPredicate,
  ArityMismatch,
  ArgumentTypeMismatch,
  UnboundVariable,
  ConstantInAction,
  DuplicateVariable,
  ConflictingPredicate,
  InvalidEffectConnective,
  NegatedNonAtom,
  InvalidCostIncrease,
  ReservedName,
  NameCollision,
  InvalidIdentifier,
  DuplicateObject,
  ObjectShadowsType,
  UnknownObjectType,
  NegationInInit,
  InvalidInitEntry,
  VariableInInit,
  UndefinedObject,
};

// Action checks run in the order Keywords..Names; task checks run Objects,
// Init, Goal. A report only ever holds issues of one category.
enum class Category {
  AllPassed,
  Keywords,
  Types,
  Predicates,
  Arity,
  Binding,
  Conflicts,
  EffectGrammar,
  Names,
  Objects,
  Init,
  Goal,
};

std::string_view to_string(IssueCode code);
std::optional<IssueCode> issue_code_from_string(std::string_view text);
std::string_view to_string(Category category);
std::optional<Category> category_from_string(std::string_view text);

const std::vector<IssueCode>& all_issue_codes();
const std::vector<Category>& action_categories();

struct ValidationIssue {
  IssueCode code;
  std::string location;
  std::string message;
  std::string suggested_fix;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  Category category = Category::AllPassed;
  std::vector<ValidationIssue> issues;

  bool passed() const { return category == Category::AllPassed; }
  bool operator==(const ValidationReport&) const = default;
};

// `context` is the domain built so far: its hierarchy, the predicates
// available to the draft and the actions already accepted. The draft's own
// new predicates count as defined.
ValidationReport validate_action(const pddl::ActionDraft& draft,
                                 const pddl::DomainSpec& context);

ValidationReport validate_task(const pddl::TaskDraft& draft,
                               const pddl::DomainSpec& domain);

// Numbered list, one line per issue: "N. <message> Fix: <suggested_fix>".
// Throws std::invalid_argument for a report without issues.
std::string render_feedback(const ValidationReport& report);

void to_json(nlohmann::json& j, const ValidationIssue& issue);
void from_json(const nlohmann::json& j, ValidationIssue& issue);
void to_json(nlohmann::json& j, const ValidationReport& report);
void from_json(const nlohmann::json& j, ValidationReport& report);

}  // namespace nl2plan::validate

#endif
