#include "nggmix/kernels.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "nggmix/error.hpp"

namespace nggmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

void check_atom(AtomParams a) {
  if (!(a.sigma > 0.0)) throw ValidationError("kernel scale sigma must be > 0");
}

}  // namespace

Observation Observation::exact(double x) {
  if (!std::isfinite(x)) throw ValidationError("exact observation must be finite");
  return {Censoring::exact, x, x};
}

Observation Observation::left_censored(double right) {
  if (std::isnan(right)) throw ValidationError("left-censored bound is NaN");
  return {Censoring::left_censored, std::nullopt, right};
}

Observation Observation::right_censored(double left) {
  if (std::isnan(left)) throw ValidationError("right-censored bound is NaN");
  return {Censoring::right_censored, left, std::nullopt};
}

Observation Observation::interval(double left, double right) {
  if (!std::isfinite(left) || !std::isfinite(right)) {
    throw ValidationError("interval bounds must be finite");
  }
  if (!(left < right)) throw ValidationError("interval requires left < right");
  return {Censoring::interval, left, right};
}

Observation Observation::from_bounds(std::optional<double> left, std::optional<double> right) {
  if (left && right) {
    if (*left == *right) return exact(*left);
    if (*left > *right) throw ValidationError("left bound exceeds right bound");
    return interval(*left, *right);
  }
  if (right) return left_censored(*right);
  if (left) return right_censored(*left);
  throw ValidationError("observation has neither bound");
}

double Observation::representative() const {
  switch (kind_) {
    case Censoring::exact:
      return *left_;
    case Censoring::interval:
      return 0.5 * (*left_ + *right_);
    case Censoring::left_censored:
      return *right_;
    case Censoring::right_censored:
      return *left_;
  }
  return *left_;
}

std::string to_string(Censoring kind) {
  switch (kind) {
    case Censoring::exact:
      return "exact";
    case Censoring::left_censored:
      return "left_censored";
    case Censoring::right_censored:
      return "right_censored";
    case Censoring::interval:
      return "interval";
  }
  return "?";
}

Support KernelSpec::support() const {
  switch (family) {
    case KernelFamily::normal:
    case KernelFamily::double_exponential:
      return Support::real_line;
    case KernelFamily::gamma:
    case KernelFamily::lognormal:
      return Support::positive;
    case KernelFamily::beta:
      return Support::unit_interval;
  }
  return Support::real_line;
}

bool KernelSpec::in_support(double x) const {
  switch (support()) {
    case Support::real_line:
      return std::isfinite(x);
    case Support::positive:
      return x > 0.0 && std::isfinite(x);
    case Support::unit_interval:
      return x > 0.0 && x < 1.0;
  }
  return false;
}

bool KernelSpec::valid_location(double mu) const {
  switch (family) {
    case KernelFamily::gamma:
      return mu > 0.0 && std::isfinite(mu);
    case KernelFamily::beta:
      return mu > 0.0 && mu < 1.0;
    default:
      return std::isfinite(mu);
  }
}

ShapeRate gamma_natural(AtomParams atom) {
  const double v = atom.sigma * atom.sigma;
  return {atom.mu * atom.mu / v, atom.mu / v};
}

AtomParams gamma_from_natural(ShapeRate sr) {
  return {sr.shape / sr.rate, std::sqrt(sr.shape) / sr.rate};
}

BetaShapes beta_natural(AtomParams atom) {
  const double concentration = 1.0 / (atom.sigma * atom.sigma);
  return {atom.mu * concentration, (1.0 - atom.mu) * concentration};
}

AtomParams beta_from_natural(BetaShapes ab) {
  const double concentration = ab.a + ab.b;
  return {ab.a / concentration, 1.0 / std::sqrt(concentration)};
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "normal" || name == "gaussian") return KernelFamily::normal;
  if (name == "laplace" || name == "double_exponential") return KernelFamily::double_exponential;
  if (name == "gamma") return KernelFamily::gamma;
  if (name == "lognormal") return KernelFamily::lognormal;
  if (name == "beta") return KernelFamily::beta;
  throw ValidationError("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::normal:
      return "normal";
    case KernelFamily::double_exponential:
      return "laplace";
    case KernelFamily::gamma:
      return "gamma";
    case KernelFamily::lognormal:
      return "lognormal";
    case KernelFamily::beta:
      return "beta";
  }
  return "?";
}

double kernel_log_density(double x, const KernelSpec& k, AtomParams a) {
  if (std::isnan(x)) throw ValidationError("kernel density evaluated at NaN");
  check_atom(a);
  switch (k.family) {
    case KernelFamily::normal: {
      const double z = (x - a.mu) / a.sigma;
      return -0.5 * z * z - std::log(a.sigma) - kHalfLog2Pi;
    }
    case KernelFamily::double_exponential:
      return -std::fabs(x - a.mu) / a.sigma - std::log(2.0 * a.sigma);
    case KernelFamily::gamma: {
      if (!(x > 0.0) || !std::isfinite(x) || !(a.mu > 0.0)) return kNegInf;
      const auto [shape, rate] = gamma_natural(a);
      return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
    }
    case KernelFamily::lognormal: {
      if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
      const double lx = std::log(x);
      const double z = (lx - a.mu) / a.sigma;
      return -0.5 * z * z - std::log(a.sigma) - lx - kHalfLog2Pi;
    }
    case KernelFamily::beta: {
      if (!(x > 0.0 && x < 1.0) || !(a.mu > 0.0 && a.mu < 1.0)) return kNegInf;
      const auto [alpha, beta] = beta_natural(a);
      return (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) -
             (std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta));
    }
  }
  return kNegInf;
}

double kernel_density(double x, const KernelSpec& k, AtomParams a) {
  return std::exp(kernel_log_density(x, k, a));
}

double kernel_cdf(double x, const KernelSpec& k, AtomParams a) {
  check_atom(a);
  if (std::isnan(x)) throw ValidationError("kernel CDF evaluated at NaN");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  switch (k.family) {
    case KernelFamily::normal:
      return normal_cdf((x - a.mu) / a.sigma);
    case KernelFamily::double_exponential: {
      const double z = (x - a.mu) / a.sigma;
      return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
    case KernelFamily::gamma: {
      if (!(x > 0.0)) return 0.0;
      const auto [shape, rate] = gamma_natural(a);
      return boost::math::gamma_p(shape, rate * x);
    }
    case KernelFamily::lognormal:
      if (!(x > 0.0)) return 0.0;
      return normal_cdf((std::log(x) - a.mu) / a.sigma);
    case KernelFamily::beta: {
      if (!(x > 0.0)) return 0.0;
      if (!(x < 1.0)) return 1.0;
      const auto [alpha, beta] = beta_natural(a);
      return boost::math::ibeta(alpha, beta, x);
    }
  }
  return 0.0;
}

double kernel_sf(double x, const KernelSpec& k, AtomParams a) {
  check_atom(a);
  if (std::isnan(x)) throw ValidationError("kernel CDF evaluated at NaN");
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) return 1.0;
  switch (k.family) {
    case KernelFamily::normal:
      return normal_sf((x - a.mu) / a.sigma);
    case KernelFamily::double_exponential: {
      const double z = (x - a.mu) / a.sigma;
      return z < 0.0 ? 1.0 - 0.5 * std::exp(z) : 0.5 * std::exp(-z);
    }
    case KernelFamily::gamma: {
      if (!(x > 0.0)) return 1.0;
      const auto [shape, rate] = gamma_natural(a);
      return boost::math::gamma_q(shape, rate * x);
    }
    case KernelFamily::lognormal:
      if (!(x > 0.0)) return 1.0;
      return normal_sf((std::log(x) - a.mu) / a.sigma);
    case KernelFamily::beta: {
      if (!(x > 0.0)) return 1.0;
      if (!(x < 1.0)) return 0.0;
      const auto [alpha, beta] = beta_natural(a);
      return boost::math::ibetac(alpha, beta, x);
    }
  }
  return 1.0;
}

double observation_loglik(const Observation& obs, const KernelSpec& k, AtomParams a) {
  double prob = 0.0;
  switch (obs.kind()) {
    case Censoring::exact:
      return kernel_log_density(obs.value(), k, a);
    case Censoring::left_censored:
      prob = kernel_cdf(*obs.right(), k, a);
      break;
    case Censoring::right_censored:
      prob = kernel_sf(*obs.left(), k, a);
      break;
    case Censoring::interval: {
      const double lo = *obs.left();
      const double hi = *obs.right();
      const double f_lo = kernel_cdf(lo, k, a);
      // Both bounds in the upper tail: difference survival functions instead.
      prob = f_lo > 0.5 ? kernel_sf(lo, k, a) - kernel_sf(hi, k, a) : kernel_cdf(hi, k, a) - f_lo;
      break;
    }
  }
  return prob > 0.0 ? std::log(prob) : kNegInf;
}

namespace {
void check_lengths(std::span<const double> weights, std::span<const AtomParams> atoms) {
  if (weights.size() != atoms.size()) {
    throw ValidationError("mixture weights and atoms differ in length");
  }
}
}  // namespace

double mixture_density(double x, std::span<const double> weights, std::span<const AtomParams> atoms,
                       const KernelSpec& k) {
  check_lengths(weights, atoms);
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) total += weights[j] * kernel_density(x, k, atoms[j]);
  return total;
}

double mixture_cdf(double x, std::span<const double> weights, std::span<const AtomParams> atoms,
                   const KernelSpec& k) {
  check_lengths(weights, atoms);
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) total += weights[j] * kernel_cdf(x, k, atoms[j]);
  return std::min(1.0, std::max(0.0, total));
}

double mixture_observation_likelihood(const Observation& obs, std::span<const double> weights,
                                      std::span<const AtomParams> atoms, const KernelSpec& k) {
  check_lengths(weights, atoms);
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    total += weights[j] * std::exp(observation_loglik(obs, k, atoms[j]));
  }
  return total;
}

}  // namespace nggmix
