#include "nggmix/truncation.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace nggmix {

double levy_cumulant(int k, const NggParams& p, double u) {
  const double lambda = p.kappa + u;
  if (!(lambda > 0.0)) throw ValidationError("total-mass moments are infinite when kappa + u = 0");
  if (k < 1) throw ValidationError("cumulant order must be >= 1");
  return std::exp(std::log(p.alpha) + std::lgamma(k - p.gamma) - std::lgamma(1.0 - p.gamma) -
                  (k - p.gamma) * std::log(lambda));
}

std::vector<double> moments_from_cumulants(std::span<const double> cumulants) {
  const std::size_t n = cumulants.size();
  std::vector<double> m(n + 1, 0.0);
  m[0] = 1.0;
  for (std::size_t order = 1; order <= n; ++order) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= order; ++k) {
      acc += boost::math::binomial_coefficient<double>(order - 1, k - 1) * cumulants[k - 1] *
             m[order - k];
    }
    m[order] = acc;
  }
  return {m.begin() + 1, m.end()};
}

std::vector<double> cumulants_from_moments(std::span<const double> moments) {
  const std::size_t n = moments.size();
  std::vector<double> m(n + 1, 1.0);
  std::copy(moments.begin(), moments.end(), m.begin() + 1);
  std::vector<double> c(n, 0.0);
  for (std::size_t order = 1; order <= n; ++order) {
    double acc = m[order];
    for (std::size_t k = 1; k < order; ++k) {
      acc -= boost::math::binomial_coefficient<double>(order - 1, k - 1) * c[k - 1] * m[order - k];
    }
    c[order - 1] = acc;
  }
  return c;
}

double total_mass_moment(int m, const NggParams& p, double u) {
  if (m < 1 || m > 10) throw ValidationError("total_mass_moment: order must be in [1, 10]");
  return total_mass_moments(m, p, u).back();
}

std::vector<double> total_mass_moments(int count, const NggParams& p, double u) {
  std::vector<double> c(count);
  for (int k = 1; k <= count; ++k) c[k - 1] = levy_cumulant(k, p, u);
  return moments_from_cumulants(c);
}

void TruncationPolicy::validate() const {
  if (!(target_index > 0.0)) throw ValidationError("truncation target index must be > 0");
  if (num_moments < 1 || num_moments > 10) throw ValidationError("num_moments must be in [1, 10]");
  if (max_jumps < 1) throw ValidationError("max_jumps must be >= 1");
  if (replicates < 2) throw ValidationError("replicates must be >= 2");
}

double moment_match_index(std::span<const double> empirical, std::span<const double> exact) {
  const std::size_t k = std::min(empirical.size(), exact.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    worst = std::max(worst, std::fabs(empirical[i] - exact[i]) / exact[i]);
  }
  return worst;
}

double moment_match_index(std::span<const JumpSeries> replicates, const NggParams& p, double u,
                          int num_moments) {
  if (replicates.empty()) throw ValidationError("moment_match_index: no replicate series");
  std::vector<double> empirical(num_moments, 0.0);
  for (const auto& series : replicates) {
    if (series.empty()) throw ValidationError("moment_match_index: empty series");
    const double total = series.total();
    double power = 1.0;
    for (int k = 0; k < num_moments; ++k) {
      power *= total;
      empirical[k] += power;
    }
  }
  for (double& e : empirical) e /= static_cast<double>(replicates.size());
  const auto exact = total_mass_moments(num_moments, p, u);
  return moment_match_index(empirical, exact);
}

std::vector<double> truncated_mass_moments(std::size_t q, const NggParams& p, double u,
                                           int num_moments) {
  const double lambda = p.kappa + u;
  if (!(lambda > 0.0)) throw ValidationError("total-mass moments are infinite when kappa + u = 0");
  const double qd = static_cast<double>(q);
  const double g = p.gamma;
  const double log_norm = std::log(p.alpha) - std::lgamma(1.0 - g);

  // Integrate over y = log ξ_Q; ξ_Q ~ ga(Q, 1).
  const double y_lo = std::max((-40.0 + std::lgamma(qd + 1.0)) / qd,
                               std::log(std::max(qd - 15.0 * std::sqrt(qd), 1e-300)));
  const double y_hi = std::log(qd + 15.0 * std::sqrt(qd) + 40.0);
  constexpr int kPanels = 12;
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();

  std::vector<double> acc(num_moments, 0.0);
  std::vector<double> y_raw(num_moments), y_cum, sum_cum(num_moments);
  double total_weight = 0.0;
  const double panel = (y_hi - y_lo) / kPanels;

  auto accumulate = [&](double y, double w) {
    const double s = std::exp(y);
    const double log_density = qd * y - s - std::lgamma(qd);
    const double weight = w * std::exp(log_density);
    if (weight == 0.0) return;
    const double log_j = invert_tail_mass_log(s, p, u);
    const double jump = std::exp(log_j);
    std::vector<double> moments;
    if (q == 1) {
      moments.resize(num_moments);
      double power = 1.0;
      for (int k = 0; k < num_moments; ++k) {
        power *= jump;
        moments[k] = power;
      }
    } else {
      // E[Y^k | ξ_Q = s] = (1/s) ∫_{J}^∞ v^k ν(dv).
      const double x = lambda * jump;
      for (int k = 1; k <= num_moments; ++k) {
        const double upper = boost::math::tgamma(k - g, x);
        y_raw[k - 1] = std::exp(log_norm - (k - g) * std::log(lambda)) * upper / s;
      }
      y_cum = cumulants_from_moments(y_raw);
      for (int k = 0; k < num_moments; ++k) sum_cum[k] = (qd - 1.0) * y_cum[k];
      sum_cum[0] += jump;
      moments = moments_from_cumulants(sum_cum);
    }
    for (int k = 0; k < num_moments; ++k) acc[k] += weight * moments[k];
    total_weight += weight;
  };

  for (int panel_index = 0; panel_index < kPanels; ++panel_index) {
    const double mid = y_lo + (panel_index + 0.5) * panel;
    const double half = 0.5 * panel;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double a = nodes[i];
      const double w = weights[i] * half;
      if (a == 0.0) {
        accumulate(mid, w);
      } else {
        accumulate(mid - half * a, w);
        accumulate(mid + half * a, w);
      }
    }
  }
  for (double& a : acc) a /= total_weight;
  return acc;
}

double moment_match_index(std::size_t q, const NggParams& p, double u,
                          const TruncationPolicy& policy) {
  if (policy.estimator == MomentEstimator::exact) {
    const auto truncated = truncated_mass_moments(q, p, u, policy.num_moments);
    const auto exact = total_mass_moments(policy.num_moments, p, u);
    return moment_match_index(truncated, exact);
  }
  Rng rng(policy.seed + q);
  std::vector<JumpSeries> reps;
  reps.reserve(policy.replicates);
  for (int r = 0; r < policy.replicates; ++r) reps.push_back(sample_unfixed_jumps(p, u, q, rng));
  return moment_match_index(reps, p, u, policy.num_moments);
}

TruncationLevel truncation_level_for(const TruncationPolicy& policy, const NggParams& p,
                                     double u) {
  policy.validate();
  p.validate();
  auto index_at = [&](std::size_t q) { return moment_match_index(q, p, u, policy); };

  std::size_t hi = 1;
  double hi_index = index_at(hi);
  std::size_t lo = 0;
  while (hi_index > policy.target_index) {
    if (hi >= policy.max_jumps) return {policy.max_jumps, hi_index, false};
    lo = hi;
    hi = std::min(hi * 2, policy.max_jumps);
    hi_index = index_at(hi);
  }
  // index(lo) > target >= index(hi); shrink to the smallest passing Q.
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double mid_index = index_at(mid);
    if (mid_index <= policy.target_index) {
      hi = mid;
      hi_index = mid_index;
    } else {
      lo = mid;
    }
  }
  return {hi, hi_index, true};
}

TruncationCache::TruncationCache(double log_u_bucket_width) : width_(log_u_bucket_width) {
  if (!(width_ > 0.0)) throw ValidationError("bucket width must be > 0");
}

TruncationLevel TruncationCache::level(const TruncationPolicy& policy, const NggParams& p,
                                       double u) {
  const long long bucket =
      u > 0.0 ? static_cast<long long>(std::floor(std::log(u) / width_)) : (-1LL << 40);
  const Key key{p.alpha,
                p.kappa,
                p.gamma,
                policy.target_index,
                policy.num_moments,
                policy.max_jumps,
                policy.replicates,
                static_cast<int>(policy.estimator),
                policy.seed,
                bucket};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double u_edge = u > 0.0 ? std::exp((bucket + 1) * width_) : 0.0;
  const TruncationLevel result = truncation_level_for(policy, p, u_edge);
  std::lock_guard<std::mutex> lock(mutex_);
  ++evaluations_;
  memo_.emplace(key, result);
  return result;
}

std::size_t TruncationCache::evaluations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return evaluations_;
}

std::size_t TruncationCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.size();
}

}  // namespace nggmix
