#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "nggmix/base_measure.hpp"
#include "nggmix/kernels.hpp"

using namespace nggmix;

namespace {

const KernelFamily kFamilies[] = {KernelFamily::normal, KernelFamily::double_exponential,
                                  KernelFamily::gamma, KernelFamily::lognormal, KernelFamily::beta};

AtomParams typical_atom(KernelFamily f) {
  switch (f) {
    case KernelFamily::gamma: return {2.5, 1.2};
    case KernelFamily::lognormal: return {0.3, 0.6};
    case KernelFamily::beta: return {0.35, 0.3};
    default: return {0.7, 1.3};
  }
}

double integrate_density(const KernelSpec& k, AtomParams a, double lo, double hi) {
  auto f = [&](double x) { return kernel_density(x, k, a); };
  if (k.family == KernelFamily::double_exponential && lo < a.mu && a.mu < hi)
    return integrate_density(k, a, lo, a.mu) + integrate_density(k, a, a.mu, hi);
  if (std::isinf(lo) && std::isinf(hi)) {
    boost::math::quadrature::sinh_sinh<double> q;
    return q.integrate(f, 1e-12);
  }
  if (std::isinf(lo)) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return f(hi - t); }, 1e-12);
  }
  if (std::isinf(hi)) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return f(lo + t); }, 1e-12);
  }
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, lo, hi, 1e-12);
}

double support_lo(const KernelSpec& k) {
  return k.support() == Support::real_line ? -std::numeric_limits<double>::infinity() : 0.0;
}
double support_hi(const KernelSpec& k) {
  return k.support() == Support::unit_interval ? 1.0 : std::numeric_limits<double>::infinity();
}

double ks_statistic(std::vector<double> xs, auto cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("kernel densities integrate to one") {
  for (auto f : kFamilies) {
    KernelSpec k{f};
    auto a = typical_atom(f);
    CHECK(integrate_density(k, a, support_lo(k), support_hi(k)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kernel cdf matches the integrated density") {
  for (auto f : kFamilies) {
    KernelSpec k{f};
    auto a = typical_atom(f);
    for (double p : {0.1, 0.3, 0.6, 0.9}) {
      double x = k.support() == Support::unit_interval ? p
                 : k.support() == Support::positive   ? 4.0 * p
                                                      : -3.0 + 7.0 * p;
      double F = integrate_density(k, a, support_lo(k), x);
      CHECK(kernel_cdf(x, k, a) == doctest::Approx(F).epsilon(1e-8));
      CHECK(kernel_cdf(x, k, a) + kernel_sf(x, k, a) == doctest::Approx(1.0).epsilon(1e-12));
      double h = 1e-5;
      double fd = (kernel_cdf(x + h, k, a) - kernel_cdf(x - h, k, a)) / (2 * h);
      CHECK(fd == doctest::Approx(kernel_density(x, k, a)).epsilon(1e-5));
    }
  }
}

TEST_CASE("kernels outside the support") {
  KernelSpec g{KernelFamily::gamma};
  CHECK(kernel_log_density(-1.0, g, {2.0, 1.0}) == -std::numeric_limits<double>::infinity());
  CHECK(kernel_cdf(-1.0, g, {2.0, 1.0}) == 0.0);
  KernelSpec b{KernelFamily::beta};
  CHECK(kernel_density(1.5, b, {0.5, 0.2}) == 0.0);
  CHECK(kernel_cdf(1.5, b, {0.5, 0.2}) == 1.0);
  KernelSpec n{KernelFamily::normal};
  CHECK(kernel_cdf(std::numeric_limits<double>::infinity(), n, {0, 1}) == 1.0);
  CHECK(kernel_cdf(-std::numeric_limits<double>::infinity(), n, {0, 1}) == 0.0);
  CHECK_THROWS_AS(kernel_log_density(std::nan(""), n, {0, 1}), ValidationError);
  CHECK(n.valid_location(-4.0));
  CHECK_FALSE(g.valid_location(-4.0));
  CHECK_FALSE(b.valid_location(1.0));
}

TEST_CASE("closed forms") {
  KernelSpec n{KernelFamily::normal};
  CHECK(kernel_density(1.0, n, {0.0, 2.0}) ==
        doctest::Approx(std::exp(-0.125) / (2.0 * std::sqrt(2.0 * M_PI))));
  KernelSpec l{KernelFamily::double_exponential};
  CHECK(kernel_density(1.0, l, {0.0, 2.0}) == doctest::Approx(0.25 * std::exp(-0.5)));
  CHECK(kernel_cdf(-1.0, l, {0.0, 2.0}) == doctest::Approx(0.5 * std::exp(-0.5)));
  CHECK(kernel_sf(30.0, n, {0.0, 1.0}) > 0.0);
}

TEST_CASE("natural parameter maps are bijections") {
  for (AtomParams a : {AtomParams{2.5, 1.2}, AtomParams{0.1, 3.0}, AtomParams{40.0, 0.5}}) {
    auto sr = gamma_natural(a);
    CHECK(sr.shape / sr.rate == doctest::Approx(a.mu));
    CHECK(std::sqrt(sr.shape) / sr.rate == doctest::Approx(a.sigma));
    auto back = gamma_from_natural(sr);
    CHECK(back.mu == doctest::Approx(a.mu).epsilon(1e-13));
    CHECK(back.sigma == doctest::Approx(a.sigma).epsilon(1e-13));
  }
  for (AtomParams a : {AtomParams{0.35, 0.3}, AtomParams{0.9, 0.1}}) {
    auto ab = beta_natural(a);
    CHECK(ab.a / (ab.a + ab.b) == doctest::Approx(a.mu));
    CHECK(ab.a + ab.b == doctest::Approx(1.0 / (a.sigma * a.sigma)));
    auto back = beta_from_natural(ab);
    CHECK(back.mu == doctest::Approx(a.mu).epsilon(1e-13));
    CHECK(back.sigma == doctest::Approx(a.sigma).epsilon(1e-13));
  }
}

TEST_CASE("observation construction") {
  CHECK(Observation::from_bounds(1.5, 1.5) == Observation::exact(1.5));
  CHECK(Observation::from_bounds(std::nullopt, 2.0).kind() == Censoring::left_censored);
  CHECK(Observation::from_bounds(2.0, std::nullopt).kind() == Censoring::right_censored);
  CHECK(Observation::from_bounds(1.0, 2.0).kind() == Censoring::interval);
  CHECK_THROWS_AS(Observation::from_bounds(3.0, 2.0), ValidationError);
  CHECK_THROWS_AS(Observation::from_bounds(std::nullopt, std::nullopt), ValidationError);
  CHECK_THROWS_AS(Observation::exact(std::nan("")), ValidationError);
  CHECK_THROWS_AS(Observation::interval(1.0, std::numeric_limits<double>::infinity()), ValidationError);
  CHECK(Observation::interval(1.0, 3.0).representative() == 2.0);
  CHECK(Observation::right_censored(4.0).representative() == 4.0);
  CHECK(to_string(Censoring::interval) == "interval");
}

TEST_CASE("censored likelihoods") {
  for (auto f : kFamilies) {
    KernelSpec k{f};
    auto a = typical_atom(f);
    double x = f == KernelFamily::beta ? 0.4 : f == KernelFamily::normal || f == KernelFamily::double_exponential ? 0.2 : 1.7;
    CHECK(std::exp(observation_loglik(Observation::left_censored(x), k, a)) ==
          doctest::Approx(kernel_cdf(x, k, a)).epsilon(1e-12));
    CHECK(std::exp(observation_loglik(Observation::right_censored(x), k, a)) ==
          doctest::Approx(kernel_sf(x, k, a)).epsilon(1e-12));
    for (double eps : {1e-3, 1e-5, 1e-7}) {
      double p = std::exp(observation_loglik(Observation::interval(x - eps, x + eps), k, a));
      CHECK(p / (2 * eps) == doctest::Approx(kernel_density(x, k, a)).epsilon(1e-4));
    }
    CHECK(observation_loglik(Observation::exact(x), k, a) == doctest::Approx(kernel_log_density(x, k, a)));
  }
  KernelSpec n{KernelFamily::normal};
  double far = observation_loglik(Observation::right_censored(30.0), n, {0.0, 1.0});
  CHECK(std::isfinite(far));
  CHECK(far < -400.0);
}

TEST_CASE("mixtures") {
  KernelSpec k{KernelFamily::normal};
  std::vector<double> w{0.3, 0.7};
  std::vector<AtomParams> atoms{{-1.0, 0.5}, {2.0, 1.0}};
  double x = 0.4;
  CHECK(mixture_density(x, w, atoms, k) ==
        doctest::Approx(0.3 * kernel_density(x, k, atoms[0]) + 0.7 * kernel_density(x, k, atoms[1])));
  CHECK(mixture_cdf(x, w, atoms, k) ==
        doctest::Approx(0.3 * kernel_cdf(x, k, atoms[0]) + 0.7 * kernel_cdf(x, k, atoms[1])));
  CHECK(mixture_observation_likelihood(Observation::exact(x), w, atoms, k) ==
        doctest::Approx(mixture_density(x, w, atoms, k)));
  std::vector<double> bad{1.0};
  CHECK_THROWS_AS(mixture_density(x, bad, atoms, k), ValidationError);
}

TEST_CASE("family names") {
  CHECK(parse_kernel_family("gaussian") == KernelFamily::normal);
  CHECK(parse_kernel_family("double_exponential") == KernelFamily::double_exponential);
  CHECK(parse_kernel_family("laplace") == KernelFamily::double_exponential);
  CHECK(to_string(KernelFamily::lognormal) == "lognormal");
  CHECK_THROWS_AS(parse_kernel_family("cauchy"), ValidationError);
  CHECK(parse_scale_family("half_cauchy") == ScaleFamily::half_cauchy);
  CHECK_THROWS_AS(parse_scale_family("weird"), ValidationError);
  std::vector<double> two{2.0, 1.0};
  CHECK(make_scale_prior("gamma", two).family() == ScaleFamily::gamma);
  std::vector<double> one{2.0};
  CHECK_THROWS_AS(make_scale_prior("gamma", one), ValidationError);
}

TEST_CASE("scale priors: normalization, sampling and medians") {
  std::vector<ScalePrior> priors{ScalePrior::gamma(2.0, 3.0),
                                 ScalePrior::lognormal(-0.5, 0.7),
                                 ScalePrior::half_cauchy(0.8),
                                 ScalePrior::half_normal(1.5),
                                 ScalePrior::half_student_t(3.0, 0.6),
                                 ScalePrior::uniform(0.2, 1.7),
                                 ScalePrior::truncated_normal(1.0, 0.5, 0.1, 2.0)};
  for (const auto& prior : priors) {
    INFO(prior.describe());
    auto dens = [&](double s) { return std::exp(prior.log_density(s)); };
    boost::math::quadrature::tanh_sinh<double> q;
    auto cdf = [&](double x) { return x <= 0.0 ? 0.0 : q.integrate(dens, 0.0, x, 1e-11); };
    boost::math::quadrature::exp_sinh<double> tail;
    double total = prior.family() == ScaleFamily::uniform            ? cdf(1.7)
                   : prior.family() == ScaleFamily::truncated_normal ? cdf(2.0)
                                                                     : tail.integrate(dens, 1e-11);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cdf(prior.median()) == doctest::Approx(0.5).epsilon(1e-6));
    Rng rng(99);
    std::vector<double> draws(4000);
    for (auto& d : draws) d = prior.sample(rng);
    std::sort(draws.begin(), draws.end());
    CHECK(draws.front() > 0.0);
    // cdf accumulated between consecutive order statistics
    double F = 0.0, prev = 0.0, d = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
      F += q.integrate(dens, prev, draws[i], 1e-11);
      prev = draws[i];
      d = std::max({d, (i + 1) / 4000.0 - F, F - i / 4000.0});
    }
    // two-sided KS at alpha 0.001 for n = 4000
    CHECK(d < 1.95 / std::sqrt(4000.0));
  }
  CHECK(ScalePrior::half_normal(1.0).log_density(0.0) > -1.0);
  CHECK(ScalePrior::gamma(2.0, 1.0).log_density(-1.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(ScalePrior::gamma(-1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ScalePrior::uniform(2.0, 1.0), ValidationError);
}

TEST_CASE("location laws") {
  LocationPrior n{LocationFamily::normal, 1.0, 4.0};
  CHECK(location_log_density(1.5, n) ==
        doctest::Approx(0.5 * std::log(4.0 / (2 * M_PI)) - 2.0 * 0.25));
  LocationPrior g{LocationFamily::gamma, 2.0, 3.0};
  boost::math::gamma_distribution<> gd(2.0, 1.0 / 3.0);
  CHECK(std::exp(location_log_density(0.8, g)) == doctest::Approx(boost::math::pdf(gd, 0.8)));
  Rng rng(3);
  std::vector<double> xs(4000);
  for (auto& x : xs) x = sample_location(g, rng);
  CHECK(ks_statistic(xs, [&](double x) { return boost::math::cdf(gd, x); }) < 1.95 / std::sqrt(4000.0));
  LocationPrior b{LocationFamily::beta, 1.0, 1.0};
  for (int i = 0; i < 100; ++i) {
    double x = sample_location(b, rng);
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  CHECK_THROWS_AS((LocationPrior{LocationFamily::normal, 0.0, -1.0}.validate()), ValidationError);
}

TEST_CASE("normal-gamma posterior") {
  NormalGammaHyper prior{1.0, 0.5, 2.0, 3.0};
  std::vector<double> xs{0.2, 1.7, 2.4, -0.3};
  auto post = normal_gamma_posterior(xs, prior);
  double n = 4, mean = 1.0, ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(post.psi2 == doctest::Approx(prior.psi2 + n));
  CHECK(post.psi1 == doctest::Approx((prior.psi2 * prior.psi1 + n * mean) / (prior.psi2 + n)));
  CHECK(post.psi3 == doctest::Approx(prior.psi3 + n / 2));
  CHECK(post.psi4 == doctest::Approx(prior.psi4 + 0.5 * ss +
                                     prior.psi2 * n * (mean - prior.psi1) * (mean - prior.psi1) /
                                         (2 * (prior.psi2 + n))));
  Rng rng(5);
  double s1 = 0.0, s2 = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    auto phi = sample_location_hyper(xs, prior, rng);
    s1 += phi.phi1;
    s2 += phi.phi2;
  }
  CHECK(s1 / reps == doctest::Approx(post.psi1).epsilon(0.03));
  CHECK(s2 / reps == doctest::Approx(post.psi3 / post.psi4).epsilon(0.03));
}

TEST_CASE("data-scaled defaults") {
  std::vector<Observation> data;
  for (int i = 0; i < 50; ++i) data.push_back(Observation::exact(10.0 + 0.1 * i));
  KernelSpec k{KernelFamily::normal};
  auto s = summarize_data(data, k);
  CHECK(s.centre == doctest::Approx(12.45));
  auto base = default_base_measure(data, k);
  CHECK(base.location.family == LocationFamily::normal);
  CHECK(base.hyper.psi1 == doctest::Approx(12.45));
  CHECK_NOTHROW(base.validate());
  auto gb = default_base_measure(data, KernelSpec{KernelFamily::gamma});
  CHECK(gb.location.family == LocationFamily::gamma);
  CHECK_FALSE(gb.update_hyper);
}
