#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nggmix/diagnostics.hpp"
#include "oracles.hpp"

using namespace nggmix;

namespace {

std::vector<std::vector<double>> iid_chains(std::size_t m, std::size_t n, std::uint64_t seed,
                                            double offset = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> out(m, std::vector<double>(n));
  for (std::size_t c = 0; c < m; ++c)
    for (auto& x : out[c]) x = z(rng) + offset * c;
  return out;
}

// Product-limit estimate; deaths precede censorings at tied times.
double kaplan_meier(const std::vector<std::pair<double, bool>>& obs, double x) {
  auto sorted = obs;
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    return a.first < b.first || (a.first == b.first && a.second && !b.second);
  });
  double s = 1.0;
  std::size_t at_risk = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size() && sorted[i].first <= x) {
    double t = sorted[i].first;
    std::size_t deaths = 0, total = 0;
    while (i < sorted.size() && sorted[i].first == t) {
      deaths += sorted[i].second;
      ++total;
      ++i;
    }
    s *= 1.0 - static_cast<double>(deaths) / at_risk;
    at_risk -= total;
  }
  return 1.0 - s;
}

}  // namespace

TEST_CASE("psrf of well-mixed chains is near one") {
  auto chains = iid_chains(4, 2000, 1);
  auto v = psrf_scalar(chains);
  REQUIRE(v.point);
  CHECK(*v.point == doctest::Approx(1.0).epsilon(0.01));
  CHECK(*v.upper >= *v.point);
  auto bad = psrf_scalar(iid_chains(4, 2000, 1, 2.0));
  CHECK(*bad.point > 2.0);
}

TEST_CASE("psrf point estimate without the df correction") {
  auto chains = iid_chains(3, 50, 7, 0.3);
  const double m = 3, n = 50;
  std::vector<double> means;
  double w = 0.0;
  for (auto& c : chains) {
    double mu = 0.0;
    for (double x : c) mu += x;
    mu /= n;
    means.push_back(mu);
    double s = 0.0;
    for (double x : c) s += (x - mu) * (x - mu);
    w += s / (n - 1);
  }
  w /= m;
  double grand = (means[0] + means[1] + means[2]) / m, bn = 0.0;
  for (double mu : means) bn += (mu - grand) * (mu - grand);
  bn /= m - 1;  // B / n
  double uncorrected = std::sqrt((n - 1) / n + (1 + 1 / m) * bn / w);
  ScalarTraceSet set;
  set.names = {"x"};
  for (auto& c : chains) set.values.push_back({c});
  auto res = psrf(set);
  REQUIRE(res.multivariate);
  // one monitored series: the multivariate value reduces to the uncorrected univariate one
  CHECK(*res.multivariate == doctest::Approx(uncorrected).epsilon(1e-12));
  auto v = psrf_scalar(chains);
  // the df correction only inflates
  CHECK(*v.point >= uncorrected);
  CHECK(*v.point == doctest::Approx(uncorrected).epsilon(0.05));
}

TEST_CASE("psrf is invariant to affine maps") {
  auto chains = iid_chains(4, 300, 3, 0.1);
  auto moved = chains;
  for (auto& c : moved)
    for (auto& x : c) x = 5.0 - 3.0 * x;
  CHECK(*psrf_scalar(chains).point == doctest::Approx(*psrf_scalar(moved).point).epsilon(1e-10));
}

TEST_CASE("degenerate series") {
  std::vector<std::vector<double>> flat(3, std::vector<double>(20, 4.0));
  auto v = psrf_scalar(flat);
  CHECK(v.degenerate);
  CHECK_FALSE(v.point);
  ScalarTraceSet set;
  set.names = {"k", "x"};
  auto xs = iid_chains(3, 20, 2);
  for (std::size_t c = 0; c < 3; ++c) set.values.push_back({flat[c], xs[c]});
  auto res = psrf(set);
  CHECK(res.univariate[0].degenerate);
  CHECK(res.univariate[1].point);
  CHECK_THROWS_AS(psrf_scalar({{1.0, 2.0}}), ValidationError);
  CHECK_THROWS_AS(psrf_scalar({{1.0, 2.0}, {1.0}}), ValidationError);
}

TEST_CASE("scalar traces from chains") {
  auto data = oracle::as_exact(oracle::bimodal_sample(20, 1));
  SamplerConfig cfg;
  cfg.iterations = 200;
  cfg.burnin = 20;
  auto runs = run_chains(data, cfg, 2, Exec::serial);
  std::vector<ChainTrace> chains;
  for (auto& r : runs) chains.push_back(*r.trace);
  auto set = scalar_traces(chains);
  CHECK(set.names == std::vector<std::string>{"n_components", "u", "loglik", "sigma"});
  REQUIRE(set.values.size() == 2);
  CHECK(set.values[0][1].size() == chains[0].rows.size());
  CHECK(set.values[1][1][3] == chains[1].rows[3].u);
}

TEST_CASE("Turnbull on exact data is the empirical cdf") {
  std::vector<double> xs{3.0, 1.0, 2.0, 2.0, 5.5, 0.1, 2.0};
  auto est = turnbull(oracle::as_exact(xs));
  for (double x : {-1.0, 0.1, 0.5, 1.0, 2.0, 2.5, 3.0, 5.5, 9.0}) {
    double ecdf = std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= x; }) / 7.0;
    CHECK(est.cdf(x) == ecdf);
  }
  CHECK(est.support.size() == 5);
}

TEST_CASE("Turnbull with right censoring is Kaplan-Meier") {
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> e(1.0), c(0.6);
  std::vector<Observation> data;
  std::vector<std::pair<double, bool>> km;
  for (int i = 0; i < 60; ++i) {
    double t = std::round(e(rng) * 20) / 20, ct = std::round(c(rng) * 20) / 20;
    if (t <= ct) {
      data.push_back(Observation::exact(t));
      km.push_back({t, true});
    } else {
      data.push_back(Observation::right_censored(ct));
      km.push_back({ct, false});
    }
  }
  auto est = turnbull(data, 1e-12);
  CHECK(est.converged);
  for (double x = 0.0; x < 4.0; x += 0.05) CHECK(est.cdf(x) == doctest::Approx(kaplan_meier(km, x)).epsilon(1e-7));
}

TEST_CASE("Turnbull on interval data is self-consistent") {
  auto data = oracle::censor(oracle::bimodal_sample(80, 2), 0.6, 3);
  auto est = turnbull(data, 1e-12);
  CHECK(est.converged);
  double total = 0.0;
  for (double m : est.mass) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 0; j < est.support.size(); ++j) {
    CHECK(est.support[j].lo <= est.support[j].hi);
    if (j) CHECK(est.support[j].lo >= est.support[j - 1].hi);
  }
  double prev = 0.0;
  for (double x = -5.0; x < 5.0; x += 0.25) {
    CHECK(est.cdf(x) >= prev);
    prev = est.cdf(x);
  }
}

TEST_CASE("goodness-of-fit tables") {
  auto xs = oracle::bimodal_sample(50, 6);
  auto data = oracle::as_exact(xs);
  std::vector<double> w{0.5, 0.5};
  std::vector<AtomParams> atoms{{-2.0, 0.7}, {2.0, 0.7}};
  std::vector<MixtureView> mix(4, MixtureView{w, atoms});
  KernelSpec k;
  auto gof = gof_data(mix, data, k, 2);
  REQUIRE(gof.pp.size() == 50);
  for (const auto& p : gof.pp) {
    double ecdf = std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= p.x; }) / 50.0;
    CHECK(p.empirical == ecdf);
    CHECK(p.model == doctest::Approx(mixture_cdf(p.x, w, atoms, k)).epsilon(1e-12));
  }
  REQUIRE_FALSE(gof.qq.empty());
  for (const auto& q : gof.qq) {
    CHECK(mixture_cdf(q.model, w, atoms, k) == doctest::Approx(q.p).epsilon(1e-6));
    CHECK(q.p > 0.0);
    CHECK(q.p < 1.0);
  }
}
