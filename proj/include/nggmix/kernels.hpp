#pragma once

#include <span>
#include <string>

#include "nggmix/observation.hpp"

namespace nggmix {

enum class KernelFamily { normal, double_exponential, gamma, lognormal, beta };
enum class Support { real_line, positive, unit_interval };

/// Every kernel is addressed through a (location μ, scale σ) pair:
///  - normal:             N(μ, σ²)
///  - double_exponential: Laplace with centre μ and scale σ
///  - gamma:              mean μ > 0, standard deviation σ (shape μ²/σ², rate μ/σ²)
///  - lognormal:          log-scale location μ and log-scale σ
///  - beta:               mean μ ∈ (0,1), concentration a + b = 1/σ²
struct KernelSpec {
  KernelFamily family = KernelFamily::normal;

  Support support() const;
  bool in_support(double x) const;
  /// Whether μ is admissible as a location for this family.
  bool valid_location(double mu) const;
};

struct AtomParams {
  double mu = 0.0;
  double sigma = 1.0;
  bool operator==(const AtomParams&) const = default;
};

struct ShapeRate {
  double shape;
  double rate;
};
struct BetaShapes {
  double a;
  double b;
};

ShapeRate gamma_natural(AtomParams atom);
AtomParams gamma_from_natural(ShapeRate sr);
BetaShapes beta_natural(AtomParams atom);
AtomParams beta_from_natural(BetaShapes ab);

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily family);

double kernel_log_density(double x, const KernelSpec& k, AtomParams a);
double kernel_density(double x, const KernelSpec& k, AtomParams a);
double kernel_cdf(double x, const KernelSpec& k, AtomParams a);
/// 1 - F, evaluated without cancellation in the upper tail.
double kernel_sf(double x, const KernelSpec& k, AtomParams a);

/// log of the likelihood contribution: density for exact values, F / 1-F /
/// F(r)-F(l) for censored ones. -inf when the probability is zero.
double observation_loglik(const Observation& obs, const KernelSpec& k, AtomParams a);

/// Σ_j w_j k(x | θ_j). Throws ValidationError on a length mismatch.
double mixture_density(double x, std::span<const double> weights, std::span<const AtomParams> atoms,
                       const KernelSpec& k);
double mixture_cdf(double x, std::span<const double> weights, std::span<const AtomParams> atoms,
                   const KernelSpec& k);
/// Mixture probability of the observation (density for exact values).
double mixture_observation_likelihood(const Observation& obs, std::span<const double> weights,
                                      std::span<const AtomParams> atoms, const KernelSpec& k);

}  // namespace nggmix
