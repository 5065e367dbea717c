#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "nggmix/levy.hpp"

namespace nggmix {

/// k-th cumulant of the total mass under tilt u: c_k = ∫ v^k ν_u(dv)
///   = α Γ(k-γ) / (Γ(1-γ) (κ+u)^{k-γ}).
/// Requires κ + u > 0.
double levy_cumulant(int k, const NggParams& p, double u);

/// Raw moments from cumulants: m_n = Σ_k C(n-1, k-1) c_k m_{n-k}.
std::vector<double> moments_from_cumulants(std::span<const double> cumulants);
std::vector<double> cumulants_from_moments(std::span<const double> moments);

/// m-th raw moment of the total mass Σ J_i; 1 <= m <= 10.
double total_mass_moment(int m, const NggParams& p, double u);
std::vector<double> total_mass_moments(int count, const NggParams& p, double u);

/// How the moments of a Q-term truncated sum are obtained.
enum class MomentEstimator {
  /// Conditional on ξ_Q the first Q-1 arrivals are uniform on (0, ξ_Q), so
  /// the moments of Σ_{j<=Q} J_j reduce to a one-dimensional integral of
  /// incomplete-gamma expressions against the ga(Q, 1) law of ξ_Q.
  exact,
  /// Sample moments over `replicates` simulated series.
  monte_carlo,
};

struct TruncationPolicy {
  double target_index = 0.01;
  int num_moments = 4;
  std::size_t max_jumps = 2000;
  int replicates = 100;
  MomentEstimator estimator = MomentEstimator::exact;
  std::uint64_t seed = 20231;

  void validate() const;
};

/// max_k |empirical_k - exact_k| / exact_k over the first K entries.
double moment_match_index(std::span<const double> empirical, std::span<const double> exact);

/// Moment-match index from replicated series: sample moments of the series
/// totals against the exact total-mass moments.
double moment_match_index(std::span<const JumpSeries> replicates, const NggParams& p, double u,
                          int num_moments);

/// E[(Σ_{j<=q} J_j)^k], k = 1..num_moments, via the exact estimator.
std::vector<double> truncated_mass_moments(std::size_t q, const NggParams& p, double u,
                                           int num_moments);

/// Index for a q-term truncation under the policy's estimator.
double moment_match_index(std::size_t q, const NggParams& p, double u,
                          const TruncationPolicy& policy);

struct TruncationLevel {
  std::size_t jumps = 0;
  double index = 0.0;
  bool budget_reached = true;  // false: capped at max_jumps
};

/// Smallest Q <= max_jumps whose index is within the target (doubling search
/// then bisection).
TruncationLevel truncation_level_for(const TruncationPolicy& policy, const NggParams& p, double u);

/// Memo of truncation levels keyed by (params, policy, log-u bucket). Each
/// bucket is evaluated at its upper edge, which is conservative since Q grows
/// with u. Safe for concurrent use.
class TruncationCache {
 public:
  explicit TruncationCache(double log_u_bucket_width = 0.05);

  TruncationLevel level(const TruncationPolicy& policy, const NggParams& p, double u);

  std::size_t evaluations() const;
  std::size_t size() const;

 private:
  using Key = std::tuple<double, double, double, double, int, std::size_t, int, int, std::uint64_t,
                         long long>;
  double width_;
  mutable std::mutex mutex_;
  std::map<Key, TruncationLevel> memo_;
  std::size_t evaluations_ = 0;
};

}  // namespace nggmix
