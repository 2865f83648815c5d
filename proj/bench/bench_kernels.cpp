#include <benchmark/benchmark.h>

#include "witness/attack.hpp"
#include "witness/sandwich.hpp"
#include "witness/structcheck.hpp"

using namespace witness;

namespace {

// Arg 0 = serial reference, 1 = parallel.
bool parallel(const benchmark::State& st) { return st.range(0) != 0; }

void sandwich(benchmark::State& st) {
  const auto spec = load_builtin("mission");
  for (auto _ : st) benchmark::DoNotOptimize(check_sandwich(spec, SelectionKind::Max, 20, 1, parallel(st)));
}

void probe_fi(benchmark::State& st) {
  std::vector<ProtocolSpec> corpus;
  for (const auto& name : builtin_names()) corpus.push_back(load_builtin(name));
  auto make = [](const VerificationContext& ctx) { return make_level_function(SelectionKind::Max, ctx); };
  for (auto _ : st) benchmark::DoNotOptimize(probe_full_invariance_random(corpus, make, 8, 4, 1, parallel(st)));
}

void overlap(benchmark::State& st) {
  const auto spec = load_builtin("mission");
  for (auto _ : st) benchmark::DoNotOptimize(check_overlap(spec, parallel(st)));
}

void attack_layers(benchmark::State& st) {
  const auto spec = load_builtin("mission");
  SearchConfig c;
  c.max_sessions = 1;
  c.parallel = parallel(st);
  for (auto _ : st) benchmark::DoNotOptimize(search_attack(spec, c));
}

}  // namespace

BENCHMARK(sandwich)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(probe_fi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(overlap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(attack_layers)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
