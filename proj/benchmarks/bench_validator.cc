#include <benchmark/benchmark.h>

#include "bench_common.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/validate/validator.h"

using namespace nl2plan;

static void BM_validate_actions(benchmark::State& state) {
  auto domain = pddl::parse_domain(bench_file("pddl/isr-domain.pddl"));
  pddl::DomainSpec context = domain;
  context.actions.clear();
  for (auto _ : state) {
    for (const auto& a : domain.actions) {
      benchmark::DoNotOptimize(validate::validate_action({a, {}, {}}, context));
    }
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * domain.actions.size()));
}
BENCHMARK(BM_validate_actions);

static void BM_validate_task(benchmark::State& state) {
  auto domain = pddl::parse_domain(bench_file("pddl/blocksworld-domain.pddl"));
  auto p = pddl::parse_problem(bench_file("pddl/blocksworld-hard.pddl"), domain);
  pddl::TaskDraft task{p.objects, {}, p.initial_cost, p.goal};
  for (const auto& atom : p.init) task.init.push_back(pddl::Formula::make_atom(atom));
  for (auto _ : state) benchmark::DoNotOptimize(validate::validate_task(task, domain));
}
BENCHMARK(BM_validate_task);
