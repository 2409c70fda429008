#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "lowdeg/audit.h"
#include "lowdeg/kernels.h"
#include "lowdeg/synth.h"

using namespace lowdeg;

namespace {

struct Fixture {
  Dataset ds{2, 1};
  HypothesisClass cls{"all", {GroupFunction::all()}};
  Matrix groups, f, y;
  WeightFamily family = monomial_family(3, 4);
  std::vector<EffectiveWeight> effective;

  explicit Fixture(std::size_t n) {
    SynthSpec s;
    s.l = 3;
    s.n = n;
    s.seed = 1;
    s.features.assign(16, 0.5);
    for (int j = 0; j < 16; ++j) s.groups.push_back(j);
    s.complements = true;
    s.fstar_rule.kind = FstarRule::Kind::softmax;
    for (int j = 0; j < 16; ++j) s.fstar_rule.coef.push_back({0.1 * j, 0.0, -0.05 * j});
    ds = generate(s);
    cls = spec_class(s, ds);
    groups = cls.evaluate(ds);
    y = label_matrix(ds, Space::one_hot(3));
    std::mt19937_64 rng(2);
    f = Matrix(ds.size(), 3);
    for (auto& v : f.data()) v = uniform01(rng);
    effective = family.effective();
  }
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_ViolationMatrix(benchmark::State& state, Exec exec) {
  const auto& fx = fixture(std::size_t(state.range(0)));
  const double total = fx.ds.total_weight();
  for (auto _ : state) {
    auto m = kernels::violation_matrix(exec, fx.family, fx.effective, fx.ds.weights(), total,
                                       fx.groups, fx.f, fx.y);
    benchmark::DoNotOptimize(m.data().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GroupSums(benchmark::State& state, Exec exec) {
  const auto& fx = fixture(std::size_t(state.range(0)));
  std::vector<double> z(fx.ds.size()), out(fx.groups.rows());
  kernels::residual_signal(fx.family[0], 0, fx.f, fx.y, z);
  for (auto _ : state) {
    kernels::group_sums(exec, fx.ds.weights(), fx.groups, z, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_ViolationMatrix, serial, Exec::serial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ViolationMatrix, parallel, Exec::parallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GroupSums, serial, Exec::serial)->Arg(20000)->Arg(200000);
BENCHMARK_CAPTURE(BM_GroupSums, parallel, Exec::parallel)->Arg(20000)->Arg(200000);

BENCHMARK_MAIN();
