#include <benchmark/benchmark.h>

#include "bench_common.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/planner/search.h"

using namespace nl2plan;

static void BM_solve(benchmark::State& state, const char* family, const char* problem,
                     planner::Algorithm algorithm) {
  auto d = pddl::parse_domain(bench_file(std::string("pddl/") + family + "-domain.pddl"));
  auto p = pddl::parse_problem(bench_file(std::string("pddl/") + family + "-" + problem + ".pddl"), d);
  planner::PlannerOptions o;
  o.search.algorithm = algorithm;
  size_t expanded = 0;
  for (auto _ : state) {
    auto r = planner::solve(d, p, o);
    expanded = r.stats.expanded;
    benchmark::DoNotOptimize(r);
  }
  state.counters["expanded"] = static_cast<double>(expanded);
}
BENCHMARK_CAPTURE(BM_solve, bw_hard_gbfs, "blocksworld", "hard", planner::Algorithm::GreedyBestFirst);
BENCHMARK_CAPTURE(BM_solve, bw_hard_astar, "blocksworld", "hard", planner::Algorithm::AStar);
BENCHMARK_CAPTURE(BM_solve, bw_hard_ucs, "blocksworld", "hard", planner::Algorithm::UniformCost);
BENCHMARK_CAPTURE(BM_solve, bw_unsolvable, "blocksworld", "unsolvable", planner::Algorithm::GreedyBestFirst);
BENCHMARK_CAPTURE(BM_solve, isr_gbfs, "isr", "problem", planner::Algorithm::GreedyBestFirst);
BENCHMARK_CAPTURE(BM_solve, logistics_gbfs, "logistics", "problem", planner::Algorithm::GreedyBestFirst);
