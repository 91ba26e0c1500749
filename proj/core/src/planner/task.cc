#include "nl2plan/planner/task.h"

#include "nl2plan/pddl/printer.h"

namespace nl2plan::planner {

size_t StateHash::operator()(const State& s) const {
  // FNV-1a over the packed words.
  uint64_t h = 1469598103934665603ULL;
  for (uint64_t w : s.words()) {
    h ^= w;
    h *= 1099511628211ULL;
  }
  return static_cast<size_t>(h ^ (h >> 29));
}

bool Condition::holds(const State& s) const {
  for (FactId f : pos) {
    if (!s.test(f)) return false;
  }
  for (FactId f : neg) {
    if (s.test(f)) return false;
  }
  return true;
}

bool GroundTask::is_goal(const State& s) const {
  for (const auto& g : goals) {
    if (g.holds(s)) return true;
  }
  return false;
}

State GroundTask::successor(const State& s, const GroundAction& a) const {
  State next = s;
  std::vector<const ConditionalEffect*> firing;
  for (const auto& ce : a.conditional) {
    if (ce.condition.holds(s)) firing.push_back(&ce);
  }
  for (FactId f : a.del) next.reset(f);
  for (const auto* ce : firing) {
    for (FactId f : ce->del) next.reset(f);
  }
  for (FactId f : a.add) next.set(f);
  for (const auto* ce : firing) {
    for (FactId f : ce->add) next.set(f);
  }
  return next;
}

std::string GroundTask::fact_name(FactId f) const {
  return pddl::print_atom(facts.at(static_cast<size_t>(f)));
}

}  // namespace nl2plan::planner
