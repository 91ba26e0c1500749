#include "nl2plan/planner/heuristic.h"

#include <algorithm>
#include <functional>
#include <queue>

namespace nl2plan::planner {

namespace {

long saturating_add(long a, long b) {
  if (a == kDeadEnd || b == kDeadEnd) return kDeadEnd;
  return a > kDeadEnd - b ? kDeadEnd : a + b;
}

}  // namespace

std::string_view to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::FF: return "ff";
    case HeuristicKind::GoalCount: return "goal-count";
    case HeuristicKind::Blind: return "blind";
  }
  return "";
}

FFHeuristic::FFHeuristic(const GroundTask& task) : task_(task) {
  for (size_t i = 0; i < task.actions.size(); ++i) {
    const GroundAction& a = task.actions[i];
    const long cost = task.unit_cost ? 1 : a.cost;
    ops_.push_back({i, a.pre.pos, a.add, cost});
    for (const auto& ce : a.conditional) {
      if (ce.add.empty()) continue;
      std::vector<FactId> pre = a.pre.pos;
      pre.insert(pre.end(), ce.condition.pos.begin(), ce.condition.pos.end());
      std::sort(pre.begin(), pre.end());
      pre.erase(std::unique(pre.begin(), pre.end()), pre.end());
      ops_.push_back({i, std::move(pre), ce.add, cost});
    }
  }
  consumers_.resize(task.facts.size());
  for (size_t o = 0; o < ops_.size(); ++o) {
    if (ops_[o].pre.empty()) nullary_.push_back(o);
    for (FactId f : ops_[o].pre) consumers_[static_cast<size_t>(f)].push_back(o);
  }
  fact_cost_.resize(task.facts.size());
  supporter_.resize(task.facts.size());
  unsatisfied_.resize(ops_.size());
  op_cost_.resize(ops_.size());
  marked_.resize(task.actions.size());
}

long FFHeuristic::evaluate(const State& state) {
  plan_.clear();
  if (task_.is_goal(state)) return 0;
  if (task_.goals.empty()) return kDeadEnd;

  using Entry = std::pair<long, FactId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::fill(fact_cost_.begin(), fact_cost_.end(), kDeadEnd);
  std::fill(supporter_.begin(), supporter_.end(), -1);
  for (size_t o = 0; o < ops_.size(); ++o) {
    unsatisfied_[o] = ops_[o].pre.size();
    op_cost_[o] = ops_[o].cost;
  }
  for (FactId f = 0; f < static_cast<FactId>(task_.facts.size()); ++f) {
    if (state.test(f)) {
      fact_cost_[static_cast<size_t>(f)] = 0;
      queue.push({0, f});
    }
  }
  auto apply = [&](size_t o) {
    for (FactId f : ops_[o].add) {
      auto idx = static_cast<size_t>(f);
      if (op_cost_[o] < fact_cost_[idx]) {
        fact_cost_[idx] = op_cost_[o];
        supporter_[idx] = static_cast<long>(o);
        queue.push({op_cost_[o], f});
      }
    }
  };
  for (size_t o : nullary_) apply(o);
  while (!queue.empty()) {
    auto [cost, f] = queue.top();
    queue.pop();
    if (cost > fact_cost_[static_cast<size_t>(f)]) continue;
    for (size_t o : consumers_[static_cast<size_t>(f)]) {
      op_cost_[o] = saturating_add(op_cost_[o], cost);
      if (--unsatisfied_[o] == 0) apply(o);
    }
  }

  // Cheapest goal alternative under h_add.
  const Condition* best = nullptr;
  long best_cost = kDeadEnd;
  for (const auto& g : task_.goals) {
    long sum = 0;
    for (FactId f : g.pos) sum = saturating_add(sum, fact_cost_[static_cast<size_t>(f)]);
    if (sum < best_cost) {
      best_cost = sum;
      best = &g;
    }
  }
  if (best == nullptr) return kDeadEnd;

  std::fill(marked_.begin(), marked_.end(), 0);
  std::vector<char> done(task_.facts.size(), 0);
  std::vector<FactId> open(best->pos.begin(), best->pos.end());
  long h = 0;
  while (!open.empty()) {
    FactId f = open.back();
    open.pop_back();
    auto idx = static_cast<size_t>(f);
    if (done[idx] != 0 || state.test(f)) continue;
    done[idx] = 1;
    const Op& op = ops_[static_cast<size_t>(supporter_[idx])];
    if (marked_[op.action] == 0) {
      marked_[op.action] = 1;
      plan_.push_back(op.action);
      h += op.cost;
    }
    open.insert(open.end(), op.pre.begin(), op.pre.end());
  }
  return std::max(h, 1L);
}

long GoalCountHeuristic::evaluate(const State& state) {
  if (task_.goals.empty()) return kDeadEnd;
  long best = kDeadEnd;
  for (const auto& g : task_.goals) {
    long missing = 0;
    for (FactId f : g.pos) missing += state.test(f) ? 0 : 1;
    for (FactId f : g.neg) missing += state.test(f) ? 1 : 0;
    best = std::min(best, missing);
  }
  return best;
}

std::unique_ptr<Heuristic> make_heuristic(HeuristicKind kind,
                                          const GroundTask& task) {
  switch (kind) {
    case HeuristicKind::FF: return std::make_unique<FFHeuristic>(task);
    case HeuristicKind::GoalCount: return std::make_unique<GoalCountHeuristic>(task);
    case HeuristicKind::Blind: return std::make_unique<BlindHeuristic>(task);
  }
  return nullptr;
}

}  // namespace nl2plan::planner
