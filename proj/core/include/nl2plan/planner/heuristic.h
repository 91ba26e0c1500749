#ifndef NL2PLAN_PLANNER_HEURISTIC_H
#define NL2PLAN_PLANNER_HEURISTIC_H

#include <limits>
#include <memory>
#include <string_view>
#include <vector>

#include "nl2plan/planner/task.h"

namespace nl2plan::planner {

inline constexpr long kDeadEnd = std::numeric_limits<long>::max();

enum class HeuristicKind { FF, GoalCount, Blind };

std::string_view to_string(HeuristicKind kind);

// All heuristics return 0 exactly on goal states, a value of at least 1 on
// other states, and kDeadEnd when the goal is relaxed-unreachable.
class Heuristic {
 public:
  virtual ~Heuristic() = default;
  virtual long evaluate(const State& state) = 0;
};

// Additive-heuristic best supporters, then a relaxed plan is extracted
// backwards from the cheapest goal alternative. The value is the summed
// cost of the distinct ground actions in that plan (1 each in unit-cost
// tasks). Negative conditions are ignored by the relaxation.
class FFHeuristic : public Heuristic {
 public:
  explicit FFHeuristic(const GroundTask& task);
  long evaluate(const State& state) override;

  // Ground action indices of the last extracted relaxed plan.
  const std::vector<size_t>& relaxed_plan() const { return plan_; }

 private:
  struct Op {
    size_t action;
    std::vector<FactId> pre;
    std::vector<FactId> add;
    long cost;
  };

  const GroundTask& task_;
  std::vector<Op> ops_;
  std::vector<std::vector<size_t>> consumers_;
  std::vector<size_t> nullary_;
  std::vector<long> fact_cost_;
  std::vector<long> supporter_;
  std::vector<size_t> unsatisfied_;
  std::vector<long> op_cost_;
  std::vector<char> marked_;
  std::vector<size_t> plan_;
};

// Number of unsatisfied goal literals, minimised over goal alternatives.
class GoalCountHeuristic : public Heuristic {
 public:
  explicit GoalCountHeuristic(const GroundTask& task) : task_(task) {}
  long evaluate(const State& state) override;

 private:
  const GroundTask& task_;
};

class BlindHeuristic : public Heuristic {
 public:
  explicit BlindHeuristic(const GroundTask& task) : task_(task) {}
  long evaluate(const State& state) override {
    return task_.is_goal(state) ? 0 : 1;
  }

 private:
  const GroundTask& task_;
};

std::unique_ptr<Heuristic> make_heuristic(HeuristicKind kind,
                                          const GroundTask& task);

}  // namespace nl2plan::planner

#endif
