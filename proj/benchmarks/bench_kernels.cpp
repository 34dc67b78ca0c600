#include "ram/baselines.hpp"
#include "ram/kernels.hpp"
#include "ram/oracle.hpp"
#include "ram/targets.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace ram;

namespace {

const GaussianMixture& mixture() {
  static const GaussianMixture m =
      load_mixture20(std::filesystem::path(RAM_BENCH_DATA_DIR) / "mixture20_modes.txt", MixtureCase::a);
  return m;
}

void BM_MixtureLogDensity(benchmark::State& state) {
  const auto& m = mixture();
  const Vector x = Eigen::Vector2d(4.2, 5.1);
  for (auto _ : state) benchmark::DoNotOptimize(m.log_density(x));
}
BENCHMARK(BM_MixtureLogDensity);

void BM_RamStepMixture(benchmark::State& state) {
  const LogTarget target = mixture().as_target();
  const auto prop = GaussianProposal::isotropic(2, 4.0);
  Rng rng(1);
  EvalCounter c;
  RamState s = init_ram_state(Eigen::Vector2d(0.5, 0.5), target, c);
  for (auto _ : state) benchmark::DoNotOptimize(ram_step(s, prop, target, rng, c));
  state.counters["evals_per_step"] =
      benchmark::Counter(static_cast<double>(c.total()), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_RamStepMixture);

void BM_MetropolisStepMixture(benchmark::State& state) {
  const LogTarget target = mixture().as_target();
  const auto prop = GaussianProposal::isotropic(2, 4.0);
  Rng rng(1);
  EvalCounter c;
  MetropolisState s = init_metropolis_state(Eigen::Vector2d(0.5, 0.5), target, c);
  for (auto _ : state) benchmark::DoNotOptimize(metropolis_step(s, prop, target, rng, c));
}
BENCHMARK(BM_MetropolisStepMixture);

void BM_PtStepCube(benchmark::State& state) {
  const auto mix = make_cube_mixture(static_cast<std::size_t>(state.range(0)));
  const LogTarget target = mix.as_target();
  const auto ladder = TemperatureLadder::shared({1, 2, 4, 8, 16}, GaussianProposal::isotropic(mix.dim(), 1.0));
  Rng rng(2);
  EvalCounter c;
  auto e = init_pt_ensemble(mix.means[0], ladder, target, c);
  for (auto _ : state) benchmark::DoNotOptimize(pt_step(e, ladder, target, rng, c));
}
BENCHMARK(BM_PtStepCube)->Arg(3)->Arg(7);

void BM_OracleRamJointMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Vector pi(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) pi[static_cast<Eigen::Index>(i)] = 1.0 + static_cast<double>(i % 3);
  const Matrix q = oracle::uniform_other_states(n);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::build_ram_joint_matrix(pi, q));
}
BENCHMARK(BM_OracleRamJointMatrix)->Arg(3)->Arg(5)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
