#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nggmix/kernels.hpp"
#include "nggmix/observation.hpp"
#include "nggmix/par.hpp"
#include "nggmix/sampler.hpp"

namespace nggmix {

/// Monitored scalar series: names[q] and values[chain][q][iteration].
struct ScalarTraceSet {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<double>>> values;
};

/// n_components, u, loglik and (semiparametric only) sigma per chain.
ScalarTraceSet scalar_traces(std::span<const ChainTrace> chains);

struct PsrfValue {
  std::string name;
  std::optional<double> point;  // empty when degenerate
  std::optional<double> upper;
  bool degenerate = false;
  std::string note;
};

struct PsrfResult {
  std::vector<PsrfValue> univariate;
  std::optional<double> multivariate;
  bool multivariate_degenerate = false;
};

/// Gelman–Rubin diagnostic with the degrees-of-freedom correction and the
/// F-based upper limit at `confidence`; multivariate version from the largest
/// eigenvalue of W^{-1} B / n.
PsrfResult psrf(const ScalarTraceSet& traces, double confidence = 0.95);

/// Single series across chains: chains[c][t].
PsrfValue psrf_scalar(const std::vector<std::vector<double>>& chains, double confidence = 0.95);

/// Innermost interval of the Turnbull construction. Point masses are closed
/// [lo, lo]; the others are half-open (lo, hi].
struct TurnbullInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool point = false;
};

struct TurnbullEstimate {
  std::vector<TurnbullInterval> support;
  std::vector<double> mass;
  std::vector<double> expected_counts;  // mass * n
  std::size_t n = 0;
  std::size_t iterations = 0;
  bool converged = true;

  /// Step CDF: mass of the support intervals ending at or before x.
  double cdf(double x) const;
};

TurnbullEstimate turnbull(std::span<const Observation> data, double tol = 1e-10, std::size_t max_iter = 10000);

struct PpPoint {
  double x = 0.0;
  double empirical = 0.0;
  double model = 0.0;
};

struct QqPoint {
  double p = 0.0;
  double empirical = 0.0;
  double model = 0.0;
};

struct GofData {
  std::vector<PpPoint> pp;
  std::vector<QqPoint> qq;
};

/// PP and QQ tables: empirical (or Turnbull) CDF against the posterior-mean
/// model CDF at the finite support points. The QQ table uses every
/// `qq_thin`-th iteration.
GofData gof_data(std::span<const MixtureView> mixtures, std::span<const Observation> data, const KernelSpec& kernel,
                 std::size_t qq_thin = 10);

}  // namespace nggmix
