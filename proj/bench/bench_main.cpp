// Microbenchmarks: suite evaluation serial vs OpenMP, and CMJoin against the
// SJ / VJ baselines on the testkit families.

#include <benchmark/benchmark.h>

#include "cmcq/bound.hpp"
#include "cmcq/engine.hpp"
#include "cmcq/testkit.hpp"

using namespace cmcq;

namespace {

// Five descendant axes under relations that keep every suite's LP nontrivial.
const ValidatedQuery& wide_query() {
  static const ValidatedQuery q = validate(parse_query(
      "REL R1(b,c,d) FROM \"r1\"; REL R2(a,e) FROM \"r2\"; REL R3(c,f) FROM \"r3\";"
      "TREE T FROM \"t\" MATCH :a[//:b//:c][:d//:e]//:f//:g; RETURN a,b,c,d,e,f,g"));
  return q;
}

void BM_SuitesSerial(benchmark::State& state) {
  BoundOptions o;
  o.opt1 = o.opt2 = false;
  o.search = BoundOptions::Search::Exhaustive;
  o.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(compute_bound(wide_query(), BoundMode::all_positions(), o));
}
BENCHMARK(BM_SuitesSerial)->Unit(benchmark::kMillisecond);

void BM_SuitesParallel(benchmark::State& state) {
  BoundOptions o;
  o.opt1 = o.opt2 = false;
  o.search = BoundOptions::Search::Exhaustive;
  o.parallel = true;
  for (auto _ : state) benchmark::DoNotOptimize(compute_bound(wide_query(), BoundMode::all_positions(), o));
}
BENCHMARK(BM_SuitesParallel)->Unit(benchmark::kMillisecond);

void BM_SuitesPruned(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compute_bound(wide_query(), BoundMode::all_positions()));
}
BENCHMARK(BM_SuitesPruned)->Unit(benchmark::kMillisecond);

template <int Algo>
void BM_Evaluate(benchmark::State& state) {
  const Instance inst = gen_family(static_cast<Family>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const ValidatedQuery q = validate(parse_query(inst.query_text));
  const Database db = to_database(inst);
  std::uint64_t intermediate = 0;
  for (auto _ : state) {
    const Evaluation ev = Algo == 0 ? cmjoin(q, db) : baseline(Algo == 1 ? Baseline::SJ : Baseline::VJ, q, db);
    intermediate = ev.metrics.total_intermediate;
    benchmark::DoNotOptimize(ev.result.rows.data());
  }
  state.counters["intermediate"] = static_cast<double>(intermediate);
  state.SetLabel(std::string(to_string(static_cast<Family>(state.range(0)))));
}

void family_args(benchmark::internal::Benchmark* b) {
  for (int f = 0; f < 5; ++f)
    for (int n : {8, 32}) b->Args({f, n});
}

// VJ crosses node tables before filtering; the large triangle is out of reach.
void large_triangle(benchmark::internal::Benchmark* b) {
  family_args(b);
  b->Args({static_cast<int>(Family::TriangleLike), 400});
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Evaluate, 0)->Name("cmjoin")->Apply(large_triangle)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Evaluate, 1)->Name("sj")->Apply(large_triangle)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Evaluate, 2)->Name("vj")->Apply(family_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
