#include "nl2plan/planner/search.h"

#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace nl2plan::planner {

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  State state;
  long parent;
  long action;
  long g;
};

class Searcher {
 public:
  Searcher(const GroundTask& task, const SearchOptions& options)
      : task_(task), options_(options), start_(Clock::now()) {
    result_.stats.facts = task.facts.size();
    result_.stats.ground_actions = task.actions.size();
  }

  SearchResult run() {
    if (task_.goals.empty()) {
      result_.detail = "goal is unsatisfiable";
      return finish(Outcome::Unsolvable);
    }
    if (options_.algorithm == Algorithm::BreadthFirst) return breadth_first();
    return best_first();
  }

 private:
  SearchResult finish(Outcome outcome) {
    result_.outcome = outcome;
    result_.stats.seconds =
        std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(result_);
  }

  SearchResult solved(long node) {
    result_.cost = nodes_[static_cast<size_t>(node)].g;
    for (long n = node; nodes_[static_cast<size_t>(n)].parent >= 0;
         n = nodes_[static_cast<size_t>(n)].parent) {
      result_.plan.push_back(
          static_cast<size_t>(nodes_[static_cast<size_t>(n)].action));
    }
    std::reverse(result_.plan.begin(), result_.plan.end());
    return finish(Outcome::Solved);
  }

  // Returns a description of the exhausted limit, or nothing.
  std::optional<std::string> over_limit() {
    if (result_.stats.expanded >= options_.max_expansions) {
      return "expansion limit of " + std::to_string(options_.max_expansions) +
             " reached";
    }
    if (nodes_.size() >= options_.max_states) {
      return "state limit of " + std::to_string(options_.max_states) +
             " reached";
    }
    if ((result_.stats.expanded & 255U) == 0 &&
        Clock::now() - start_ > options_.time_limit) {
      return "time limit of " + std::to_string(options_.time_limit.count()) +
             " ms reached";
    }
    return std::nullopt;
  }

  long add_node(State s, long parent, long action, long g) {
    nodes_.push_back({std::move(s), parent, action, g});
    return static_cast<long>(nodes_.size()) - 1;
  }

  long step_cost(size_t a) const {
    return task_.unit_cost ? 1 : task_.actions[a].cost;
  }

  SearchResult breadth_first() {
    std::unordered_map<State, long, StateHash> seen;
    std::deque<long> queue;
    long root = add_node(task_.init, -1, -1, 0);
    seen.emplace(task_.init, root);
    if (task_.is_goal(task_.init)) return solved(root);
    queue.push_back(root);
    while (!queue.empty()) {
      if (auto limit = over_limit()) {
        result_.detail = *limit;
        return finish(Outcome::ResourceLimit);
      }
      long n = queue.front();
      queue.pop_front();
      ++result_.stats.expanded;
      for (size_t a = 0; a < task_.actions.size(); ++a) {
        const State& s = nodes_[static_cast<size_t>(n)].state;
        if (!task_.applicable(task_.actions[a], s)) continue;
        State next = task_.successor(s, task_.actions[a]);
        ++result_.stats.generated;
        if (seen.count(next) > 0) continue;
        long g = nodes_[static_cast<size_t>(n)].g + step_cost(a);
        long child = add_node(next, n, static_cast<long>(a), g);
        seen.emplace(std::move(next), child);
        if (task_.is_goal(nodes_[static_cast<size_t>(child)].state)) {
          return solved(child);
        }
        queue.push_back(child);
      }
    }
    result_.detail = "search space exhausted";
    return finish(Outcome::Unsolvable);
  }

  SearchResult best_first() {
    const Algorithm alg = options_.algorithm;
    const HeuristicKind kind =
        alg == Algorithm::UniformCost ? HeuristicKind::Blind : options_.heuristic;
    std::unique_ptr<Heuristic> heuristic = make_heuristic(kind, task_);
    const bool greedy = alg == Algorithm::GreedyBestFirst;
    const bool use_h = alg != Algorithm::UniformCost;

    // (primary key, secondary key, insertion order, node)
    using Entry = std::tuple<long, long, size_t, long>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::unordered_map<State, long, StateHash> best_g;
    size_t counter = 0;

    auto push = [&](long node) -> bool {
      long h = 0;
      if (use_h) {
        h = heuristic->evaluate(nodes_[static_cast<size_t>(node)].state);
        ++result_.stats.evaluated;
        if (h == kDeadEnd) return false;
      }
      long g = nodes_[static_cast<size_t>(node)].g;
      if (greedy) {
        open.emplace(h, 0, counter++, node);
      } else {
        open.emplace(g + h, h, counter++, node);
      }
      return true;
    };

    long root = add_node(task_.init, -1, -1, 0);
    best_g.emplace(task_.init, 0);
    push(root);
    while (!open.empty()) {
      if (auto limit = over_limit()) {
        result_.detail = *limit;
        return finish(Outcome::ResourceLimit);
      }
      long n = std::get<3>(open.top());
      open.pop();
      const long g = nodes_[static_cast<size_t>(n)].g;
      if (!greedy && best_g.at(nodes_[static_cast<size_t>(n)].state) < g) {
        continue;
      }
      if (task_.is_goal(nodes_[static_cast<size_t>(n)].state)) return solved(n);
      ++result_.stats.expanded;
      for (size_t a = 0; a < task_.actions.size(); ++a) {
        const State& s = nodes_[static_cast<size_t>(n)].state;
        if (!task_.applicable(task_.actions[a], s)) continue;
        State next = task_.successor(s, task_.actions[a]);
        ++result_.stats.generated;
        const long ng = g + step_cost(a);
        auto it = best_g.find(next);
        if (it != best_g.end() && (greedy || it->second <= ng)) continue;
        if (it == best_g.end()) {
          best_g.emplace(next, ng);
        } else {
          it->second = ng;
        }
        push(add_node(std::move(next), n, static_cast<long>(a), ng));
      }
    }
    result_.detail = "search space exhausted";
    return finish(Outcome::Unsolvable);
  }

  const GroundTask& task_;
  const SearchOptions& options_;
  Clock::time_point start_;
  std::vector<Node> nodes_;
  SearchResult result_;
};

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::GreedyBestFirst: return "gbfs";
    case Algorithm::AStar: return "astar";
    case Algorithm::UniformCost: return "ucs";
    case Algorithm::BreadthFirst: return "bfs";
  }
  return "";
}

std::optional<Algorithm> algorithm_from_string(std::string_view text) {
  for (Algorithm a : {Algorithm::GreedyBestFirst, Algorithm::AStar,
                      Algorithm::UniformCost, Algorithm::BreadthFirst}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

std::optional<HeuristicKind> heuristic_from_string(std::string_view text) {
  for (HeuristicKind h :
       {HeuristicKind::FF, HeuristicKind::GoalCount, HeuristicKind::Blind}) {
    if (to_string(h) == text) return h;
  }
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Solved: return "plan";
    case Outcome::Unsolvable: return "unsolvable";
    case Outcome::ResourceLimit: return "resource-limit";
  }
  return "";
}

SearchResult search(const GroundTask& task, const SearchOptions& options) {
  return Searcher(task, options).run();
}

PlanResult solve(const pddl::DomainSpec& domain,
                 const pddl::ProblemSpec& problem,
                 const PlannerOptions& options) {
  PlanResult out;
  const auto start = Clock::now();
  GroundTask task;
  try {
    task = ground(domain, problem, options.grounding);
  } catch (const GroundingLimitError& e) {
    out.outcome = Outcome::ResourceLimit;
    out.detail = e.what();
    out.stats.seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    return out;
  }
  SearchResult r = search(task, options.search);
  out.outcome = r.outcome;
  out.stats = r.stats;
  out.stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.detail = r.detail;
  if (r.outcome == Outcome::Solved) {
    pddl::Plan plan;
    for (size_t a : r.plan) {
      plan.steps.push_back({task.actions[a].name, task.actions[a].args});
    }
    plan.cost = r.cost;
    out.plan = std::move(plan);
  }
  return out;
}

}  // namespace nl2plan::planner
