#include "nggmix/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nggmix/error.hpp"

namespace nggmix {

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double trapezoid(std::span<const double> grid, std::span<const double> values) {
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) total += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return total;
}

std::vector<double> default_grid(std::span<const Observation> data, const KernelSpec& kernel, std::size_t points) {
  if (data.empty()) throw ValidationError("cannot build a grid for empty data");
  if (points < 2) throw ValidationError("grid needs at least 2 points");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double min_positive = lo;
  for (const Observation& o : data) {
    for (auto bound : {o.left(), o.right()}) {
      if (bound && std::isfinite(*bound)) {
        lo = std::min(lo, *bound);
        hi = std::max(hi, *bound);
        if (*bound > 0.0) min_positive = std::min(min_positive, *bound);
      }
    }
  }
  if (!std::isfinite(lo)) throw ValidationError("data has no finite values");
  double pad = 0.1 * (hi - lo);
  if (pad == 0.0) pad = std::max(0.1 * std::fabs(lo), 1.0);
  lo -= pad;
  hi += pad;
  const Support s = kernel.support();
  if (s != Support::real_line && lo <= 0.0) {
    lo = std::isfinite(min_positive) ? 0.5 * min_positive : 1e-3 * hi;
  }
  if (s == Support::unit_interval) hi = std::min(hi, 1.0 - 1e-3);
  if (!(lo < hi)) throw ValidationError("data range does not intersect the kernel support");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<MixtureView> pooled_mixtures(std::span<const ChainTrace> chains) {
  std::vector<MixtureView> out;
  for (const ChainTrace& c : chains) {
    for (const TraceRow& r : c.rows) out.push_back(r.mixture());
  }
  return out;
}

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("credible level must lie in (0, 1)");
}

BandEstimate summarize_columns(std::span<const double> grid, const std::vector<double>& matrix, std::size_t rows,
                               double level) {
  const std::size_t g_count = grid.size();
  BandEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.mean.resize(g_count);
  est.lower.resize(g_count);
  est.upper.resize(g_count);
  std::vector<double> column(rows);
  for (std::size_t g = 0; g < g_count; ++g) {
    double sum = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
      column[t] = matrix[t * g_count + g];
      sum += column[t];
    }
    std::sort(column.begin(), column.end());
    est.mean[g] = sum / static_cast<double>(rows);
    est.lower[g] = std::min(sorted_quantile(column, 0.5 * (1.0 - level)), est.mean[g]);
    est.upper[g] = std::max(sorted_quantile(column, 0.5 * (1.0 + level)), est.mean[g]);
  }
  return est;
}

void check_inputs(std::span<const MixtureView> mixtures, std::span<const double> grid) {
  if (mixtures.empty()) throw ValidationError("trace has no kept iterations");
  if (grid.empty()) throw ValidationError("evaluation grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("grid must be strictly increasing");
  }
}

}  // namespace

BandEstimate density_estimate(std::span<const MixtureView> mixtures, std::span<const double> grid,
                              const KernelSpec& kernel, double level, Exec exec) {
  check_level(level);
  check_inputs(mixtures, grid);
  return summarize_columns(grid, density_matrix(grid, mixtures, kernel, exec), mixtures.size(), level);
}

BandEstimate cdf_estimate(std::span<const MixtureView> mixtures, std::span<const double> grid,
                          const KernelSpec& kernel, double level, Exec exec) {
  check_level(level);
  check_inputs(mixtures, grid);
  return summarize_columns(grid, cdf_matrix(grid, mixtures, kernel, exec), mixtures.size(), level);
}

double mixture_quantile(const MixtureView& mixture, const KernelSpec& kernel, double p, double tol) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile probability must lie in (0, 1)");
  auto cdf = [&](double x) { return mixture_cdf(x, mixture.weights, mixture.atoms, kernel); };
  double lo, hi;
  const Support s = kernel.support();
  if (s == Support::unit_interval) {
    lo = 0.0;
    hi = 1.0;
  } else {
    double centre = 0.0, width = 0.0;
    for (std::size_t j = 0; j < mixture.atoms.size(); ++j) {
      const AtomParams a = mixture.atoms[j];
      const double w = mixture.weights[j];
      if (kernel.family == KernelFamily::lognormal) {
        centre += w * std::exp(a.mu);
        width = std::max(width, std::exp(a.mu + a.sigma));
      } else {
        centre += w * a.mu;
        width = std::max(width, a.sigma);
      }
    }
    width = std::max(width, 1e-8);
    if (s == Support::positive) {
      lo = 0.0;
      hi = std::max(centre, 0.0) + width;
    } else {
      lo = centre - width;
      hi = centre + width;
      for (int i = 0; i < 200 && cdf(lo) >= p; ++i) lo -= (hi - lo);
    }
    for (int i = 0; i < 200 && cdf(hi) <= p; ++i) hi += (hi - lo);
  }
  for (int i = 0; i < 400 && hi - lo > tol * std::max(1.0, std::fabs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

QuantileEstimate quantile_estimate(std::span<const MixtureView> mixtures, const KernelSpec& kernel, double p,
                                   double level) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile probability must lie in (0, 1)");
  check_level(level);
  if (mixtures.empty()) throw ValidationError("trace has no kept iterations");
  QuantileEstimate est;
  est.p = p;
  est.draws.reserve(mixtures.size());
  for (const MixtureView& m : mixtures) est.draws.push_back(mixture_quantile(m, kernel, p));
  std::vector<double> sorted = est.draws;
  std::sort(sorted.begin(), sorted.end());
  est.point = sorted_quantile(sorted, 0.5);
  est.lower = sorted_quantile(sorted, 0.5 * (1.0 - level));
  est.upper = sorted_quantile(sorted, 0.5 * (1.0 + level));
  return est;
}

CpoEstimate cpo(std::span<const MixtureView> mixtures, std::span<const Observation> data, const KernelSpec& kernel,
                Exec exec) {
  if (mixtures.empty()) throw ValidationError("trace has no kept iterations");
  const std::size_t t_count = mixtures.size();
  const std::size_t n = data.size();
  const std::vector<double> lik = likelihood_matrix(data, mixtures, kernel, exec);
  CpoEstimate est;
  est.values.resize(n);
  std::vector<double> inverse(t_count);
  for (std::size_t i = 0; i < n; ++i) {
    bool zero = false;
    for (std::size_t t = 0; t < t_count; ++t) {
      const double f = lik[t * n + i];
      if (!(f > 0.0)) zero = true;
      inverse[t] = 1.0 / f;
    }
    if (zero) {
      est.values[i] = 0.0;
      ++est.zero_count;
      continue;
    }
    // Summing in sorted order makes the result independent of iteration order.
    std::sort(inverse.begin(), inverse.end());
    const double total = std::accumulate(inverse.begin(), inverse.end(), 0.0);
    est.values[i] = static_cast<double>(t_count) / total;
  }
  if (n > 0) {
    est.mean = std::accumulate(est.values.begin(), est.values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> sorted = est.values;
    std::sort(sorted.begin(), sorted.end());
    est.median = sorted_quantile(sorted, 0.5);
  }
  return est;
}

}  // namespace nggmix
