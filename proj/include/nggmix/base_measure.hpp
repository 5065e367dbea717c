#pragma once

#include <span>
#include <string>

#include "nggmix/error.hpp"
#include "nggmix/kernels.hpp"
#include "nggmix/observation.hpp"

namespace nggmix {

enum class LocationFamily { normal, gamma, beta };

/// Law of atom locations. normal: N(φ₁, 1/φ₂) with φ₂ a precision;
/// gamma: shape φ₁, rate φ₂; beta: shapes φ₁, φ₂.
struct LocationPrior {
  LocationFamily family = LocationFamily::normal;
  double phi1 = 0.0;
  double phi2 = 1.0;

  void validate() const;
};

enum class ScaleFamily { gamma, lognormal, half_cauchy, half_normal, half_student_t, uniform, truncated_normal };

/// Law of atom scales (fully nonparametric) or of the common scale
/// (semiparametric). Build through the named constructors.
class ScalePrior {
 public:
  static ScalePrior gamma(double shape, double rate);
  static ScalePrior lognormal(double meanlog, double sdlog);
  static ScalePrior half_cauchy(double scale);
  static ScalePrior half_normal(double sd);
  static ScalePrior half_student_t(double df, double scale);
  static ScalePrior uniform(double lo, double hi);
  static ScalePrior truncated_normal(double mean, double sd, double lo, double hi);

  ScaleFamily family() const { return family_; }
  /// Parameters in constructor order; unused slots are 0.
  double param(int i) const { return params_[i]; }

  double log_density(double sigma) const;
  double sample(Rng& rng) const;
  double median() const;
  std::string describe() const;

 private:
  ScalePrior(ScaleFamily family, double a, double b, double c = 0.0, double d = 0.0)
      : family_(family), params_{a, b, c, d} {}

  ScaleFamily family_;
  double params_[4];
};

/// Conjugate hyperprior on a normal location law:
///   φ₂ ~ ga(ψ₃, rate ψ₄),  φ₁ | φ₂ ~ N(ψ₁, 1/(ψ₂ φ₂)).
struct NormalGammaHyper {
  double psi1 = 0.0;
  double psi2 = 0.01;
  double psi3 = 2.0;
  double psi4 = 2.0;

  void validate() const;
};

struct BaseMeasureSpec {
  LocationPrior location;
  ScalePrior scale = ScalePrior::gamma(2.0, 2.0);
  NormalGammaHyper hyper;
  /// Resample φ each sweep. Only meaningful for a normal location law;
  /// gamma and beta location laws keep φ fixed.
  bool update_hyper = true;

  void validate() const;
};

double location_log_density(double mu, const LocationPrior& prior);
double sample_location(const LocationPrior& prior, Rng& rng);

double scale_prior_logdensity(double sigma, const BaseMeasureSpec& spec);
double scale_prior_sample(const BaseMeasureSpec& spec, Rng& rng);

/// Normal–gamma posterior given the distinct locations.
NormalGammaHyper normal_gamma_posterior(std::span<const double> locations, const NormalGammaHyper& prior);

/// One draw of φ = (φ₁, φ₂) from the conjugate posterior.
LocationPrior sample_location_hyper(std::span<const double> locations, const NormalGammaHyper& prior,
                                    Rng& rng);

/// Location and spread of the data on the kernel's location scale (log scale
/// for the lognormal kernel). Censored points contribute their
/// representative value.
struct DataSummary {
  double centre = 0.0;
  double spread = 1.0;
};
DataSummary summarize_data(std::span<const Observation> data, const KernelSpec& kernel);

/// Weakly informative defaults scaled to the data: location law matched to
/// the kernel's location domain, scale prior ga(2, rate 4/spread) and
/// ψ = (centre, 0.01, 2, 2·spread²).
BaseMeasureSpec default_base_measure(std::span<const Observation> data, const KernelSpec& kernel);

ScaleFamily parse_scale_family(const std::string& name);
/// Scale prior from a family name and its parameters in constructor order.
ScalePrior make_scale_prior(const std::string& family, std::span<const double> params);
std::string to_string(ScaleFamily family);

}  // namespace nggmix
