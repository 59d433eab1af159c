#include <benchmark/benchmark.h>

#include <random>

#include "ddlab/definability.hpp"
#include "ddlab/dualdd.hpp"
#include "ddlab/permlab.hpp"
#include "ddlab/pregeometry.hpp"

using namespace ddlab;

namespace {

VecSet random_vecset(unsigned dim, std::mt19937_64& rng) {
  std::vector<Bits> members;
  for (Bits v = 0; v < (Bits{1} << dim); ++v) {
    if (rng() & 1u) members.push_back(v);
  }
  return VecSet(dim, std::move(members));
}

}  // namespace

static void BM_FLinearRandom(benchmark::State& state) {
  const unsigned d = static_cast<unsigned>(state.range(0));
  std::mt19937_64 rng(kDefaultSeed);
  std::vector<VecSet> inputs;
  for (int i = 0; i < 64; ++i) {
    VecSet s = random_vecset(d, rng);
    inputs.push_back(s.united(VecSet(d, {0})));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f_linear(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_FLinearRandom)->DenseRange(3, 7);

// Subspace plus one stray vector: the worst case for the search.
static void BM_FLinearSubspacePlusPoint(benchmark::State& state) {
  const unsigned d = static_cast<unsigned>(state.range(0));
  std::vector<Bits> gens;
  for (unsigned i = 0; i + 1 < d; ++i) gens.push_back(Bits{1} << i);
  const VecSet s = span(VecSet(d, gens)).members.united(VecSet(d, {Bits{1} << (d - 1)}));
  for (auto _ : state) benchmark::DoNotOptimize(f_linear(s));
}
BENCHMARK(BM_FLinearSubspacePlusPoint)->DenseRange(3, 8);

static void BM_PreimageLinear(benchmark::State& state) {
  const unsigned d = static_cast<unsigned>(state.range(0));
  const VecSet t(d, {0b001, 0b110});
  for (auto _ : state) benchmark::DoNotOptimize(construct_preimage_linear(t));
}
BENCHMARK(BM_PreimageLinear)->DenseRange(5, 9, 2);

static void BM_EnumerateSubspaces(benchmark::State& state) {
  const unsigned d = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_subspaces(d));
}
BENCHMARK(BM_EnumerateSubspaces)->DenseRange(3, 6);

static void BM_GeneralPreimage(benchmark::State& state) {
  const GeneralSurjection inst(ClosureOperator::linear(static_cast<unsigned>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(inst.preimage({1}));
}
BENCHMARK(BM_GeneralPreimage)->Arg(4)->Arg(5);

static void BM_LocalHomogeneity(benchmark::State& state) {
  const ClosureOperator op = ClosureOperator::affine(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_local_homogeneity(op, 2, 4));
}
BENCHMARK(BM_LocalHomogeneity)->Arg(3)->Arg(4);

static void BM_SupportRecursive(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<Tuple> t;
  for (Point b = 1; b < n; ++b) t.push_back({0, b});
  for (Point a = 1; a < n; ++a) t.push_back({a, a});
  const Relation r = Relation::from_tuples(n, 2, t);
  for (auto _ : state) benchmark::DoNotOptimize(support_recursive(r));
}
BENCHMARK(BM_SupportRecursive)->DenseRange(5, 9, 2);

static void BM_MinimalSupport(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(kDefaultSeed);
  Relation r(n, 2);
  for (std::size_t i = 0; i < r.tuple_space(); ++i) {
    if (rng() % 4 == 0) r.insert(r.decode(i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(minimal_support(r));
}
BENCHMARK(BM_MinimalSupport)->DenseRange(4, 8, 2);

static void BM_SynthesizeFormula(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<Tuple> t;
  for (Point a = 0; a < n; ++a) t.push_back({a, a});
  t.push_back({0, 1});
  const Relation r = Relation::from_tuples(n, 2, t);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_formula(r, {0, 1}));
}
BENCHMARK(BM_SynthesizeFormula)->DenseRange(4, 8, 2);

static void BM_DichotomySweep(benchmark::State& state) {
  const unsigned d = static_cast<unsigned>(state.range(0));
  std::mt19937_64 rng(kDefaultSeed);
  const VecSet e(d, {1});
  std::vector<VecSet> bs;
  for (int i = 0; i < 64; ++i) bs.push_back(random_vecset(d, rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(check_dichotomy(bs[i++ % bs.size()], e));
}
BENCHMARK(BM_DichotomySweep)->DenseRange(4, 10, 3);

BENCHMARK_MAIN();
