#include <benchmark/benchmark.h>

#include "qsteady/channel.hpp"
#include "qsteady/gibbs.hpp"
#include "qsteady/perturb.hpp"
#include "qsteady/steady.hpp"

namespace {

using namespace qsteady;

ChannelModel random_ring(int n, double eps) {
  return make_random_model(build_ring(n), RandomModelOptions{}, 11, eps);
}

void BM_ApplyChannel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EpsilonChannel ch(random_ring(n, 0.5));
  Matrix rho = maximally_mixed(n);
  for (auto _ : state) {
    rho = ch.apply(rho);
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_ApplyChannel)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

void BM_ApplyAdjoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EpsilonChannel ch(random_ring(n, 0.5));
  Matrix a = tensor_embed(Matrix(pauli(3)), SupportSet{0}, n);
  for (auto _ : state) {
    a = ch.apply_adjoint(a);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_ApplyAdjoint)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PauliTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EpsilonChannel ch(random_ring(n, 0.5));
  const auto fp = iterate_fixed_point(ch, zero_state(n));
  const Matrix h = gibbs_hamiltonian(fp.rho);
  for (auto _ : state) benchmark::DoNotOptimize(pauli_transform(h).coeffs.data());
}
BENCHMARK(BM_PauliTransform)->DenseRange(6, 8, 2)->Unit(benchmark::kMillisecond);

void BM_TransitionMap(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const TransitionEngine engine(random_ring(10, 0.0));
  const auto seq = a_k_sequence(LocalOperator{SupportSet{0}, Matrix(pauli(3))}, engine, k);
  const DualWauliOperator& o = seq.ops.back();
  for (auto _ : state) benchmark::DoNotOptimize(engine.apply(o).size());
  state.counters["terms"] = static_cast<double>(o.size());
}
BENCHMARK(BM_TransitionMap)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

void BM_DenseOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EpsilonChannel ch(random_ring(n, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(dense_fixed_point_oracle(ch).data());
}
BENCHMARK(BM_DenseOracle)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
