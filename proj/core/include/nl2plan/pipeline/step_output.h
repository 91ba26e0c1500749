#ifndef NL2PLAN_PIPELINE_STEP_OUTPUT_H
#define NL2PLAN_PIPELINE_STEP_OUTPUT_H

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nl2plan/pddl/model.h"

namespace nl2plan::pipeline {

// A response that does not follow the step's output grammar.
class StepOutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TypeEntry {
  std::string name;
  std::string description;

  bool operator==(const TypeEntry&) const = default;
};
using TypeList = std::vector<TypeEntry>;

enum class TypeOrigin { Requested, SynthesizedParent };

struct TypeTree {
  pddl::TypeHierarchy hierarchy;
  std::map<std::string, TypeOrigin> origin;

  bool operator==(const TypeTree&) const = default;
};

struct NlAction {
  std::string name;
  std::string description;
  std::string example;

  bool operator==(const NlAction&) const = default;
};

// Content of the single fenced block tagged `tag`. Throws StepOutputError
// when there is none, more than one, or it is not closed.
std::string extract_block(std::string_view response, std::string_view tag);

// `name: description` lines. Names are lowercased and spaces become '_'.
// Duplicates are dropped with a warning.
TypeList parse_types(std::string_view block, std::vector<std::string>* warnings = nullptr);

// `type: parent` lines. Every entry of `requested` must appear on the left.
// Parents that are not requested become synthesized parents under "object"
// unless given a parent themselves; one left without children is dropped with
// a warning. Throws StepOutputError on a missing type or a cycle.
TypeTree parse_hierarchy(std::string_view block, const TypeList& requested,
                         std::vector<std::string>* warnings = nullptr);

// Records of `name:`, `description:` and `example:` lines separated by blank
// lines. Duplicated names are dropped with a warning; zero actions throw.
std::vector<NlAction> parse_actions(std::string_view block,
                                    std::vector<std::string>* warnings = nullptr);

// nullopt for the "No feedback." sentinel, otherwise the feedback text.
// Reads the `feedback` block when there is one, the whole response if not.
std::optional<std::string> parse_feedback(std::string_view response);

// Inverse renderings, used in prompts and as editable text.
std::string render_types(const TypeList& types);
std::string render_hierarchy(const TypeTree& tree);
// Indented tree rooted at "object".
std::string render_tree(const pddl::TypeHierarchy& hierarchy);
std::string render_actions(const std::vector<NlAction>& actions);
std::string fenced(std::string_view tag, std::string_view content);

void to_json(nlohmann::json& j, const TypeEntry& t);
void from_json(const nlohmann::json& j, TypeEntry& t);
void to_json(nlohmann::json& j, const NlAction& a);
void from_json(const nlohmann::json& j, NlAction& a);
// [{name, parent, description, origin}] in hierarchy order.
nlohmann::json tree_to_json(const TypeTree& tree);
TypeTree tree_from_json(const nlohmann::json& j);

// Predicates and types that no action refers to. Types stay when they are
// used by an action parameter, a quantifier, a kept predicate, or are an
// ancestor of a type that stays.
struct PruneResult {
  std::vector<std::string> predicates;
  std::vector<std::string> types;
};
PruneResult prune_domain(pddl::DomainSpec& domain);

}  // namespace nl2plan::pipeline

#endif
