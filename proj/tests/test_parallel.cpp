#include <doctest.h>

#include <omp.h>

#include <random>
#include <vector>

#include "nggmix/clustering.hpp"
#include "nggmix/par.hpp"
#include "nggmix/posterior.hpp"
#include "nggmix/sampler.hpp"
#include "oracles.hpp"

using namespace nggmix;

namespace {

struct Mixtures {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<AtomParams>> a;
  std::vector<MixtureView> views;

  Mixtures(std::size_t t, std::size_t k) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < t; ++i) {
      std::vector<double> wi(k);
      std::vector<AtomParams> ai(k);
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        wi[j] = u(rng);
        s += wi[j];
        ai[j] = {-4.0 + 8.0 * u(rng), 0.2 + u(rng)};
      }
      for (auto& x : wi) x /= s;
      w.push_back(wi);
      a.push_back(ai);
    }
    for (std::size_t i = 0; i < t; ++i) views.push_back({w[i], a[i]});
  }
};

}  // namespace

TEST_CASE("parallel kernels reproduce the serial reference bit for bit") {
  omp_set_num_threads(4);
  auto data = oracle::censor(oracle::bimodal_sample(300, 1), 0.3, 2);
  Mixtures mix(120, 9);
  KernelSpec k;
  std::vector<double> grid;
  for (int i = 0; i < 150; ++i) grid.push_back(-5.0 + i * 0.07);

  CHECK(density_matrix(grid, mix.views, k, Exec::serial) == density_matrix(grid, mix.views, k, Exec::parallel));
  CHECK(cdf_matrix(grid, mix.views, k, Exec::serial) == cdf_matrix(grid, mix.views, k, Exec::parallel));
  CHECK(likelihood_matrix(data, mix.views, k, Exec::serial) == likelihood_matrix(data, mix.views, k, Exec::parallel));

  std::vector<double> lj;
  for (double x : mix.w[0]) lj.push_back(std::log(x));
  std::vector<double> uniforms(data.size());
  std::mt19937_64 rng(3);
  for (auto& x : uniforms) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::vector<int> ls(data.size()), lp(data.size());
  std::vector<double> ms(data.size()), mp(data.size());
  long fs = allocate_observations(data, lj, mix.a[0], k, uniforms, ls, ms, Exec::serial);
  long fp = allocate_observations(data, lj, mix.a[0], k, uniforms, lp, mp, Exec::parallel);
  CHECK(fs == -1);
  CHECK(fs == fp);
  CHECK(ls == lp);
  CHECK(ms == mp);

  std::vector<std::vector<int>> labelings;
  for (int t = 0; t < 50; ++t) {
    std::vector<int> c(data.size());
    for (auto& x : c) x = static_cast<int>(rng() % 4);
    labelings.push_back(c);
  }
  CHECK(coclustering_counts(labelings, data.size(), Exec::serial) ==
        coclustering_counts(labelings, data.size(), Exec::parallel));
  CHECK(posterior_similarity(labelings, Exec::serial).p == posterior_similarity(labelings, Exec::parallel).p);

  auto ds = density_estimate(mix.views, grid, k, 0.95, Exec::serial);
  auto dp = density_estimate(mix.views, grid, k, 0.95, Exec::parallel);
  CHECK(ds.mean == dp.mean);
  CHECK(ds.upper == dp.upper);
  CHECK(cpo(mix.views, data, k, Exec::serial).values == cpo(mix.views, data, k, Exec::parallel).values);
}

TEST_CASE("allocation reports the first impossible observation") {
  std::vector<Observation> data{Observation::exact(0.0), Observation::interval(1e6, 1e6 + 1.0),
                                Observation::interval(2e6, 2e6 + 1.0)};
  std::vector<AtomParams> atoms{{0.0, 1e-3}};
  std::vector<double> lj{0.0}, u{0.5, 0.5, 0.5}, m(3);
  std::vector<int> labels(3);
  KernelSpec k;
  CHECK(allocate_observations(data, lj, atoms, k, u, labels, m, Exec::serial) == 1);
  CHECK(allocate_observations(data, lj, atoms, k, u, labels, m, Exec::parallel) == 1);
}

TEST_CASE("chains and sweeps do not depend on the execution mode") {
  omp_set_num_threads(4);
  auto data = oracle::as_exact(oracle::bimodal_sample(80, 2));
  SamplerConfig cfg;
  cfg.iterations = 200;
  cfg.burnin = 20;
  cfg.model = ModelKind::fully_nonparametric;
  auto serial_sweeps = run_chain(data, cfg);
  cfg.exec = Exec::parallel;
  auto parallel_sweeps = run_chain(data, cfg);
  REQUIRE(serial_sweeps.rows.size() == parallel_sweeps.rows.size());
  for (std::size_t i = 0; i < serial_sweeps.rows.size(); ++i) {
    CHECK(serial_sweeps.rows[i].labels == parallel_sweeps.rows[i].labels);
    CHECK(serial_sweeps.rows[i].loglik == parallel_sweeps.rows[i].loglik);
  }

  auto seq = run_chains(data, cfg, 3, Exec::serial);
  auto par = run_chains(data, cfg, 3, Exec::parallel);
  for (std::size_t c = 0; c < 3; ++c) {
    REQUIRE(seq[c].trace);
    REQUIRE(par[c].trace);
    CHECK(seq[c].trace->seed == cfg.seed + c);
    const auto& a = seq[c].trace->rows;
    const auto& b = par[c].trace->rows;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].u == b[i].u);
      CHECK(a[i].weights == b[i].weights);
      CHECK(a[i].atoms == b[i].atoms);
    }
  }
  CHECK(seq[0].trace->rows.back().u != seq[1].trace->rows.back().u);
}
