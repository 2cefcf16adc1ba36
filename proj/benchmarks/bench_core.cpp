#include <benchmark/benchmark.h>

#include "cpext/fixtures.hpp"

using namespace cpext;

namespace {

MapSpec random_spec(int din, int dout, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Mat> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.push_back(random_hermitian(din, rng));
    ys.push_back(random_hermitian(dout, rng));
  }
  return preprocess(xs, ys);
}

AuInstance random_qubit_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {random_density(2, rng), random_density(2, rng), random_density(2, rng), random_density(2, rng)};
}

}  // namespace

static void BM_GammaSdp(benchmark::State& st) {
  MapSpec s = random_spec(st.range(0), st.range(0), 3, 1);
  for (auto _ : st) benchmark::DoNotOptimize(gamma_sdp(s).gamma);
}
BENCHMARK(BM_GammaSdp)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_DeltaSdp(benchmark::State& st) {
  MapSpec s = random_spec(st.range(0), st.range(0), 3, 2);
  for (auto _ : st) benchmark::DoNotOptimize(delta_sdp(s).delta);
}
BENCHMARK(BM_DeltaSdp)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ChannelExtensionQubit(benchmark::State& st) {
  MapSpec s = to_spec(random_qubit_instance(3));
  for (auto _ : st) benchmark::DoNotOptimize(channel_extension(s).delta);
}
BENCHMARK(BM_ChannelExtensionQubit)->Unit(benchmark::kMillisecond);

static void BM_CptpDeltaQutrit(benchmark::State& st) {
  MapSpec s = to_spec(fixtures::transpose_qutrits());
  for (auto _ : st) benchmark::DoNotOptimize(cptp_delta(s).delta_tp);
}
BENCHMARK(BM_CptpDeltaQutrit)->Unit(benchmark::kMillisecond);

static void BM_AuCondition(benchmark::State& st) {
  AuInstance a = fixtures::transpose_qutrits();
  for (auto _ : st) benchmark::DoNotOptimize(au_condition(a).min_value);
}
BENCHMARK(BM_AuCondition)->Unit(benchmark::kMicrosecond);

static void BM_FidelityCriterion(benchmark::State& st) {
  AuInstance a = random_qubit_instance(4);
  for (auto _ : st) benchmark::DoNotOptimize(fidelity_criterion(a).fidelity_in);
}
BENCHMARK(BM_FidelityCriterion)->Unit(benchmark::kMicrosecond);

static void BM_WitnessVerify(benchmark::State& st) {
  AuInstance a = fixtures::transpose_qutrits();
  AuWitnessPackage w = fixtures::transpose_qutrits_witness();
  for (auto _ : st) benchmark::DoNotOptimize(verify_au_witness(a, w).objective);
}
BENCHMARK(BM_WitnessVerify)->Unit(benchmark::kMicrosecond);

static void BM_PolytopeExtremes(benchmark::State& st) {
  MapSpec s = fixtures::commuting_square();
  for (auto _ : st) benchmark::DoNotOptimize(commuting_domain_positive(s).min_eig);
}
BENCHMARK(BM_PolytopeExtremes)->Unit(benchmark::kMicrosecond);

static void BM_SearchTrial(benchmark::State& st) {
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(transpose_counterexample_search(3, 1, ++seed).hit_fraction);
}
BENCHMARK(BM_SearchTrial)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
