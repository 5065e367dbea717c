#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nggmix/kernels.hpp"
#include "nggmix/observation.hpp"
#include "nggmix/par.hpp"
#include "nggmix/sampler.hpp"

namespace nggmix {

/// Sample quantile with linear interpolation between order statistics
/// (R's type 7). `sorted` must be ascending and nonempty.
double sorted_quantile(std::span<const double> sorted, double prob);

/// Trapezoid rule over an increasing grid.
double trapezoid(std::span<const double> grid, std::span<const double> values);

/// `points` equispaced values over the data range padded by 10% on each
/// side, clipped to the kernel support.
std::vector<double> default_grid(std::span<const Observation> data, const KernelSpec& kernel,
                                 std::size_t points = 200);

/// All kept iterations of the given chains, in chain order.
std::vector<MixtureView> pooled_mixtures(std::span<const ChainTrace> chains);

/// Pointwise posterior mean and central (1-level)/2 … (1+level)/2 band.
struct BandEstimate {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

BandEstimate density_estimate(std::span<const MixtureView> mixtures, std::span<const double> grid,
                              const KernelSpec& kernel, double level = 0.95, Exec exec = Exec::parallel);

BandEstimate cdf_estimate(std::span<const MixtureView> mixtures, std::span<const double> grid,
                          const KernelSpec& kernel, double level = 0.95, Exec exec = Exec::parallel);

/// x with F(x) = p for one mixture, by bisection to `tol` in x.
double mixture_quantile(const MixtureView& mixture, const KernelSpec& kernel, double p, double tol = 1e-8);

struct QuantileEstimate {
  double p = 0.0;
  double point = 0.0;  // median over iterations
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> draws;  // per-iteration quantiles
};

/// Quantile of every iteration's mixture, summarized by the median and the
/// central `level` interval.
QuantileEstimate quantile_estimate(std::span<const MixtureView> mixtures, const KernelSpec& kernel, double p,
                                   double level = 0.95);

struct CpoEstimate {
  std::vector<double> values;
  std::size_t zero_count = 0;  // observations with a zero predictive in some iteration
  double mean = 0.0;
  double median = 0.0;
};

/// Harmonic-mean CPO: CPO_i = (T^{-1} Σ_t 1/f_t(x_i))^{-1}, with censored
/// observations contributing their probability.
CpoEstimate cpo(std::span<const MixtureView> mixtures, std::span<const Observation> data, const KernelSpec& kernel,
                Exec exec = Exec::parallel);

}  // namespace nggmix
