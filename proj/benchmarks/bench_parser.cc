#include <benchmark/benchmark.h>

#include "bench_common.h"
#include "nl2plan/pddl/parser.h"
#include "nl2plan/pddl/printer.h"

using namespace nl2plan;

static void BM_parse_domain(benchmark::State& state, const char* family) {
  std::string text = bench_file(std::string("pddl/") + family + "-domain.pddl");
  for (auto _ : state) benchmark::DoNotOptimize(pddl::parse_domain(text));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK_CAPTURE(BM_parse_domain, blocksworld, "blocksworld");
BENCHMARK_CAPTURE(BM_parse_domain, isr, "isr");
BENCHMARK_CAPTURE(BM_parse_domain, logistics, "logistics");

static void BM_round_trip(benchmark::State& state) {
  auto domain = pddl::parse_domain(bench_file("pddl/isr-domain.pddl"));
  auto problem = pddl::parse_problem(bench_file("pddl/isr-problem.pddl"), domain);
  for (auto _ : state) {
    auto d = pddl::parse_domain(pddl::print_domain(domain));
    benchmark::DoNotOptimize(pddl::parse_problem(pddl::print_problem(problem), d));
  }
}
BENCHMARK(BM_round_trip);
