#ifndef NL2PLAN_PLANNER_SEARCH_H
#define NL2PLAN_PLANNER_SEARCH_H

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nl2plan/pddl/model.h"
#include "nl2plan/planner/heuristic.h"
#include "nl2plan/planner/task.h"

namespace nl2plan::planner {

enum class Algorithm { GreedyBestFirst, AStar, UniformCost, BreadthFirst };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> algorithm_from_string(std::string_view text);
std::optional<HeuristicKind> heuristic_from_string(std::string_view text);

struct SearchOptions {
  Algorithm algorithm = Algorithm::GreedyBestFirst;
  HeuristicKind heuristic = HeuristicKind::FF;
  size_t max_expansions = 5'000'000;
  size_t max_states = 10'000'000;
  std::chrono::milliseconds time_limit{60'000};
};

struct PlannerOptions {
  SearchOptions search;
  GroundingLimits grounding;
};

enum class Outcome { Solved, Unsolvable, ResourceLimit };

// "plan", "unsolvable", "resource-limit".
std::string_view to_string(Outcome outcome);

struct SearchStats {
  size_t expanded = 0;
  size_t generated = 0;
  size_t evaluated = 0;
  size_t facts = 0;
  size_t ground_actions = 0;
  double seconds = 0.0;
};

struct SearchResult {
  Outcome outcome = Outcome::Unsolvable;
  std::vector<size_t> plan;  // indices into GroundTask::actions
  long cost = 0;
  SearchStats stats;
  std::string detail;
};

// Breadth-first search tests goals on generation and returns a plan with the
// fewest steps. Uniform-cost search, and A* with an admissible heuristic,
// return cost-optimal plans. Greedy best-first breaks ties first-in
// first-out and gives no optimality guarantee.
SearchResult search(const GroundTask& task, const SearchOptions& options);

struct PlanResult {
  Outcome outcome = Outcome::Unsolvable;
  std::optional<pddl::Plan> plan;
  SearchStats stats;
  std::string detail;
};

// Grounds and searches. Grounding limits map to ResourceLimit.
PlanResult solve(const pddl::DomainSpec& domain,
                 const pddl::ProblemSpec& problem,
                 const PlannerOptions& options = {});

}  // namespace nl2plan::planner

#endif
