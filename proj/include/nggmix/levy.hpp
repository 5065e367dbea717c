#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nggmix/error.hpp"

namespace nggmix {

/// Parameters (α, κ, γ) of the generalized gamma Lévy intensity
///   ν(dv) = α e^{-κ v} v^{-1-γ} / Γ(1-γ) dv.
/// γ = 0 is the Dirichlet process, κ = 0 the normalized stable process.
struct NggParams {
  double alpha = 1.0;
  double kappa = 0.0;
  double gamma = 0.4;

  /// Throws ValidationError unless α > 0, κ >= 0, 0 <= γ < 1 and (κ, γ) != (0, 0).
  void validate() const;
};

/// Saturation value of N(v) near the origin.
inline constexpr double kTailMassCeiling = 1e300;

struct TailMass {
  double value = 0.0;
  bool saturated = false;
};

/// log N(e^{log_v}) under exponential tilt u, where
///   N(v) = α / Γ(1-γ) ∫_v^∞ e^{-(κ+u) x} x^{-(1+γ)} dx.
double log_levy_tail_mass(double log_v, const NggParams& p, double u);

/// N(v). Saturates at kTailMassCeiling (flagged) instead of overflowing.
TailMass levy_tail_mass_checked(double v, const NggParams& p, double u);
double levy_tail_mass(double v, const NggParams& p, double u);

/// Relative tolerance on N(J) for the inversions below.
inline constexpr double kInversionTolerance = 1e-9;

/// log J solving N(J) = xi. `upper_log_bound`, when finite, must satisfy
/// N(e^bound) < xi (e.g. the previous jump of a Ferguson–Klass series); the
/// returned value is then strictly below it.
double invert_tail_mass_log(double xi, const NggParams& p, double u,
                            double upper_log_bound = std::numeric_limits<double>::infinity());

/// J solving N(J) = xi, |N(J) - xi| <= kInversionTolerance * xi.
double invert_tail_mass(double xi, const NggParams& p, double u);

/// Ferguson–Klass jump heights, stored on the log scale because Dirichlet
/// jumps decay like e^{-ξ/α} and leave the double range after a few hundred
/// terms.
struct JumpSeries {
  std::vector<double> log_jumps;  // strictly decreasing
  double tilt = 0.0;

  std::size_t size() const { return log_jumps.size(); }
  bool empty() const { return log_jumps.empty(); }
  double jump(std::size_t i) const { return std::exp(log_jumps[i]); }
  double total() const;
};

/// First `q` jumps of the series: ξ_j is the j-th arrival of a unit-rate
/// Poisson process and J_j = N^{-1}(ξ_j).
JumpSeries sample_unfixed_jumps(const NggParams& p, double u, std::size_t q, Rng& rng);

}  // namespace nggmix
