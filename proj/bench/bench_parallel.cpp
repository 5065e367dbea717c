// Serial reference vs OpenMP kernels. Arg 0 selects serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "nggmix/clustering.hpp"
#include "nggmix/par.hpp"
#include "nggmix/posterior.hpp"

using namespace nggmix;

namespace {

struct Workload {
  std::vector<Observation> data;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<AtomParams>> atoms;
  std::vector<MixtureView> views;
  std::vector<double> grid;
  std::vector<double> log_jumps;
  std::vector<double> uniforms;
  std::vector<std::vector<int>> labelings;

  Workload(std::size_t n, std::size_t t, std::size_t k) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double x = (i % 2 ? 2.0 : -2.0) + 0.7 * z(rng);
      data.push_back(i % 5 == 0 ? Observation::interval(std::floor(x), std::floor(x) + 1.0) : Observation::exact(x));
      uniforms.push_back(u(rng));
    }
    for (std::size_t s = 0; s < t; ++s) {
      std::vector<double> w(k);
      std::vector<AtomParams> a(k);
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        w[j] = u(rng);
        sum += w[j];
        a[j] = {-4.0 + 8.0 * u(rng), 0.3 + u(rng)};
      }
      for (double& x : w) x /= sum;
      weights.push_back(w);
      atoms.push_back(a);
      std::vector<int> c(n);
      for (auto& x : c) x = static_cast<int>(u(rng) * 4);
      labelings.push_back(c);
    }
    for (std::size_t s = 0; s < t; ++s) views.push_back({weights[s], atoms[s]});
    for (int g = 0; g < 400; ++g) grid.push_back(-6.0 + 0.03 * g);
    for (double w : weights[0]) log_jumps.push_back(std::log(w));
  }
};

const Workload& workload() {
  static const Workload w(1000, 400, 60);
  return w;
}

Exec mode(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_Allocation(benchmark::State& state) {
  const auto& w = workload();
  std::vector<int> labels(w.data.size());
  std::vector<double> log_mix(w.data.size());
  for (auto _ : state) {
    long bad = allocate_observations(w.data, w.log_jumps, w.atoms[0], KernelSpec{}, w.uniforms, labels, log_mix,
                                     mode(state));
    benchmark::DoNotOptimize(bad);
  }
}

void BM_DensityMatrix(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(density_matrix(w.grid, w.views, KernelSpec{}, mode(state)));
}

void BM_CdfMatrix(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(cdf_matrix(w.grid, w.views, KernelSpec{}, mode(state)));
}

void BM_LikelihoodMatrix(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(likelihood_matrix(w.data, w.views, KernelSpec{}, mode(state)));
}

void BM_Coclustering(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state)
    benchmark::DoNotOptimize(coclustering_counts(w.labelings, w.data.size(), mode(state)));
}

void BM_GreedyVi(benchmark::State& state) {
  const auto& w = workload();
  std::vector<std::vector<int>> small;
  for (std::size_t s = 0; s < 100; ++s) small.emplace_back(w.labelings[s].begin(), w.labelings[s].begin() + 200);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_loss(small, ClusterLoss::vi, {}, mode(state)));
}

}  // namespace

BENCHMARK(BM_Allocation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DensityMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CdfMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LikelihoodMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coclustering)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreedyVi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
