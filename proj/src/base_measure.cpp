#include "nggmix/base_measure.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

namespace nggmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }
double std_normal_sf(double z) { return 0.5 * std::erfc(z * std::numbers::sqrt2 / 2.0); }

void require(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

void LocationPrior::validate() const {
  switch (family) {
    case LocationFamily::normal:
      require(std::isfinite(phi1), "normal location mean must be finite");
      require(positive_finite(phi2), "normal location precision must be > 0");
      break;
    case LocationFamily::gamma:
    case LocationFamily::beta:
      require(positive_finite(phi1) && positive_finite(phi2), "location shape parameters must be > 0");
      break;
  }
}

ScalePrior ScalePrior::gamma(double shape, double rate) {
  require(positive_finite(shape) && positive_finite(rate), "gamma scale prior needs shape, rate > 0");
  return {ScaleFamily::gamma, shape, rate};
}

ScalePrior ScalePrior::lognormal(double meanlog, double sdlog) {
  require(std::isfinite(meanlog) && positive_finite(sdlog), "lognormal scale prior needs sdlog > 0");
  return {ScaleFamily::lognormal, meanlog, sdlog};
}

ScalePrior ScalePrior::half_cauchy(double scale) {
  require(positive_finite(scale), "half-Cauchy scale must be > 0");
  return {ScaleFamily::half_cauchy, scale, 0.0};
}

ScalePrior ScalePrior::half_normal(double sd) {
  require(positive_finite(sd), "half-normal sd must be > 0");
  return {ScaleFamily::half_normal, sd, 0.0};
}

ScalePrior ScalePrior::half_student_t(double df, double scale) {
  require(positive_finite(df) && positive_finite(scale), "half-t needs df, scale > 0");
  return {ScaleFamily::half_student_t, df, scale};
}

ScalePrior ScalePrior::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo < hi,
          "uniform scale prior needs 0 <= lo < hi");
  return {ScaleFamily::uniform, lo, hi};
}

ScalePrior ScalePrior::truncated_normal(double mean, double sd, double lo, double hi) {
  require(std::isfinite(mean) && positive_finite(sd), "truncated normal needs finite mean and sd > 0");
  require(std::isfinite(lo) && lo >= 0.0 && lo < hi, "truncated normal needs 0 <= lo < hi");
  require(std_normal_cdf((hi - mean) / sd) - std_normal_cdf((lo - mean) / sd) > 0.0 ||
              std_normal_sf((lo - mean) / sd) - std_normal_sf((hi - mean) / sd) > 0.0,
          "truncated normal has no mass between its bounds");
  return {ScaleFamily::truncated_normal, mean, sd, lo, hi};
}

namespace {

// Mass of N(m, s) on [lo, hi] and the standardized bounds.
struct TruncNormal {
  double a, b, mass;
  bool upper;  // work with survival functions
};

TruncNormal trunc_normal_parts(double m, double s, double lo, double hi) {
  const double a = (lo - m) / s;
  const double b = (hi - m) / s;
  if (a > 0.0) return {a, b, std_normal_sf(a) - std_normal_sf(b), true};
  return {a, b, std_normal_cdf(b) - std_normal_cdf(a), false};
}

}  // namespace

double ScalePrior::log_density(double sigma) const {
  if (std::isnan(sigma)) throw ValidationError("scale prior evaluated at NaN");
  if (sigma < 0.0) return kNegInf;
  const double* p = params_;
  switch (family_) {
    case ScaleFamily::gamma:
      if (!(sigma > 0.0)) return p[0] == 1.0 ? std::log(p[1]) : (p[0] < 1.0 ? HUGE_VAL : kNegInf);
      return p[0] * std::log(p[1]) + (p[0] - 1.0) * std::log(sigma) - p[1] * sigma - std::lgamma(p[0]);
    case ScaleFamily::lognormal: {
      if (!(sigma > 0.0)) return kNegInf;
      const double z = (std::log(sigma) - p[0]) / p[1];
      return -0.5 * z * z - std::log(p[1] * sigma) - kHalfLog2Pi;
    }
    case ScaleFamily::half_cauchy: {
      const double z = sigma / p[0];
      return std::log(2.0 / (std::numbers::pi * p[0])) - std::log1p(z * z);
    }
    case ScaleFamily::half_normal: {
      const double z = sigma / p[0];
      return std::log(2.0) - std::log(p[0]) - kHalfLog2Pi - 0.5 * z * z;
    }
    case ScaleFamily::half_student_t: {
      const double nu = p[0];
      const double z = sigma / p[1];
      return std::log(2.0) - std::log(p[1]) + std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
             0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
    }
    case ScaleFamily::uniform:
      if (sigma < p[0] || sigma > p[1]) return kNegInf;
      return -std::log(p[1] - p[0]);
    case ScaleFamily::truncated_normal: {
      if (sigma < p[2] || sigma > p[3]) return kNegInf;
      const double z = (sigma - p[0]) / p[1];
      const TruncNormal t = trunc_normal_parts(p[0], p[1], p[2], p[3]);
      return -0.5 * z * z - kHalfLog2Pi - std::log(p[1]) - std::log(t.mass);
    }
  }
  return kNegInf;
}

double ScalePrior::sample(Rng& rng) const {
  const double* p = params_;
  switch (family_) {
    case ScaleFamily::gamma:
      return std::gamma_distribution<double>(p[0], 1.0 / p[1])(rng);
    case ScaleFamily::lognormal:
      return std::lognormal_distribution<double>(p[0], p[1])(rng);
    case ScaleFamily::half_cauchy: {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      return p[0] * std::tan(0.5 * std::numbers::pi * u);
    }
    case ScaleFamily::half_normal:
      return std::fabs(std::normal_distribution<double>(0.0, p[0])(rng));
    case ScaleFamily::half_student_t:
      return p[1] * std::fabs(std::student_t_distribution<double>(p[0])(rng));
    case ScaleFamily::uniform:
      return std::uniform_real_distribution<double>(p[0], p[1])(rng);
    case ScaleFamily::truncated_normal: {
      const TruncNormal t = trunc_normal_parts(p[0], p[1], p[2], p[3]);
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const boost::math::normal_distribution<double> n01;
      double z;
      if (t.upper) {
        const double q = std_normal_sf(t.a) - u * t.mass;
        z = boost::math::quantile(boost::math::complement(n01, std::max(q, 1e-300)));
      } else {
        const double q = std_normal_cdf(t.a) + u * t.mass;
        z = boost::math::quantile(n01, std::max(q, 1e-300));
      }
      return std::clamp(p[0] + p[1] * z, p[2], p[3]);
    }
  }
  return 1.0;
}

double ScalePrior::median() const {
  const double* p = params_;
  switch (family_) {
    case ScaleFamily::gamma:
      return boost::math::gamma_p_inv(p[0], 0.5) / p[1];
    case ScaleFamily::lognormal:
      return std::exp(p[0]);
    case ScaleFamily::half_cauchy:
      return p[0];
    case ScaleFamily::half_normal:
      return p[0] * boost::math::quantile(boost::math::normal_distribution<double>(), 0.75);
    case ScaleFamily::half_student_t:
      return p[1] * boost::math::quantile(boost::math::students_t_distribution<double>(p[0]), 0.75);
    case ScaleFamily::uniform:
      return 0.5 * (p[0] + p[1]);
    case ScaleFamily::truncated_normal: {
      const TruncNormal t = trunc_normal_parts(p[0], p[1], p[2], p[3]);
      const boost::math::normal_distribution<double> n01;
      const double z = t.upper
                           ? boost::math::quantile(boost::math::complement(n01, std_normal_sf(t.a) - 0.5 * t.mass))
                           : boost::math::quantile(n01, std_normal_cdf(t.a) + 0.5 * t.mass);
      return std::clamp(p[0] + p[1] * z, p[2], p[3]);
    }
  }
  return 1.0;
}

std::string ScalePrior::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(family_) << '(';
  const int count = family_ == ScaleFamily::truncated_normal                                    ? 4
                    : (family_ == ScaleFamily::half_cauchy || family_ == ScaleFamily::half_normal) ? 1
                                                                                                 : 2;
  for (int i = 0; i < count; ++i) os << (i ? "," : "") << params_[i];
  os << ')';
  return os.str();
}

void NormalGammaHyper::validate() const {
  require(std::isfinite(psi1), "psi1 must be finite");
  require(positive_finite(psi2) && positive_finite(psi3) && positive_finite(psi4),
          "psi2, psi3, psi4 must be > 0");
}

void BaseMeasureSpec::validate() const {
  location.validate();
  hyper.validate();
}

double location_log_density(double mu, const LocationPrior& prior) {
  switch (prior.family) {
    case LocationFamily::normal: {
      const double d = mu - prior.phi1;
      return 0.5 * std::log(prior.phi2) - kHalfLog2Pi - 0.5 * prior.phi2 * d * d;
    }
    case LocationFamily::gamma:
      if (!(mu > 0.0)) return kNegInf;
      return prior.phi1 * std::log(prior.phi2) + (prior.phi1 - 1.0) * std::log(mu) - prior.phi2 * mu -
             std::lgamma(prior.phi1);
    case LocationFamily::beta:
      if (!(mu > 0.0 && mu < 1.0)) return kNegInf;
      return (prior.phi1 - 1.0) * std::log(mu) + (prior.phi2 - 1.0) * std::log1p(-mu) -
             lbeta(prior.phi1, prior.phi2);
  }
  return kNegInf;
}

double sample_location(const LocationPrior& prior, Rng& rng) {
  switch (prior.family) {
    case LocationFamily::normal:
      return std::normal_distribution<double>(prior.phi1, 1.0 / std::sqrt(prior.phi2))(rng);
    case LocationFamily::gamma:
      return std::gamma_distribution<double>(prior.phi1, 1.0 / prior.phi2)(rng);
    case LocationFamily::beta: {
      const double x = std::gamma_distribution<double>(prior.phi1, 1.0)(rng);
      const double y = std::gamma_distribution<double>(prior.phi2, 1.0)(rng);
      // Keep draws strictly inside (0, 1) for the beta kernel.
      return std::clamp(x / (x + y), 1e-12, 1.0 - 1e-12);
    }
  }
  return 0.0;
}

double scale_prior_logdensity(double sigma, const BaseMeasureSpec& spec) { return spec.scale.log_density(sigma); }

double scale_prior_sample(const BaseMeasureSpec& spec, Rng& rng) {
  double s = spec.scale.sample(rng);
  // Guard against a draw that underflowed to exactly zero.
  while (!(s > 0.0)) s = spec.scale.sample(rng);
  return s;
}

NormalGammaHyper normal_gamma_posterior(std::span<const double> locations, const NormalGammaHyper& prior) {
  const double r = static_cast<double>(locations.size());
  if (locations.empty()) return prior;
  double mean = 0.0;
  for (double x : locations) mean += x;
  mean /= r;
  double ss = 0.0;
  for (double x : locations) ss += (x - mean) * (x - mean);
  NormalGammaHyper post;
  post.psi2 = prior.psi2 + r;
  post.psi1 = (prior.psi2 * prior.psi1 + r * mean) / post.psi2;
  post.psi3 = prior.psi3 + 0.5 * r;
  post.psi4 = prior.psi4 + 0.5 * ss + 0.5 * prior.psi2 * r * (mean - prior.psi1) * (mean - prior.psi1) / post.psi2;
  return post;
}

LocationPrior sample_location_hyper(std::span<const double> locations, const NormalGammaHyper& prior, Rng& rng) {
  const NormalGammaHyper post = normal_gamma_posterior(locations, prior);
  const double precision = std::gamma_distribution<double>(post.psi3, 1.0 / post.psi4)(rng);
  const double mean = std::normal_distribution<double>(post.psi1, 1.0 / std::sqrt(post.psi2 * precision))(rng);
  return {LocationFamily::normal, mean, precision};
}

DataSummary summarize_data(std::span<const Observation> data, const KernelSpec& kernel) {
  if (data.empty()) throw ValidationError("dataset is empty");
  std::vector<double> xs;
  xs.reserve(data.size());
  for (const Observation& o : data) {
    double x = o.representative();
    if (kernel.family == KernelFamily::lognormal) {
      if (!(x > 0.0)) throw ValidationError("lognormal kernel needs positive data");
      x = std::log(x);
    }
    if (std::isfinite(x)) xs.push_back(x);
  }
  if (xs.empty()) throw ValidationError("dataset has no finite values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  DataSummary s;
  s.centre = mean;
  s.spread = sd > 0.0 ? sd : std::max(0.1 * std::fabs(mean), 1.0);
  if (kernel.family == KernelFamily::beta) s.spread = std::min(s.spread, 0.25);
  return s;
}

BaseMeasureSpec default_base_measure(std::span<const Observation> data, const KernelSpec& kernel) {
  const DataSummary s = summarize_data(data, kernel);
  BaseMeasureSpec spec;
  spec.scale = ScalePrior::gamma(2.0, 4.0 / s.spread);
  spec.hyper = {s.centre, 0.01, 2.0, 2.0 * s.spread * s.spread};
  switch (kernel.family) {
    case KernelFamily::gamma:
      spec.location = {LocationFamily::gamma, 2.0, 2.0 / std::max(s.centre, 1e-8)};
      spec.update_hyper = false;
      break;
    case KernelFamily::beta:
      spec.location = {LocationFamily::beta, 1.0, 1.0};
      spec.update_hyper = false;
      break;
    default:
      spec.location = {LocationFamily::normal, s.centre, 1.0 / (s.spread * s.spread)};
      break;
  }
  return spec;
}

ScaleFamily parse_scale_family(const std::string& name) {
  if (name == "gamma") return ScaleFamily::gamma;
  if (name == "lognormal") return ScaleFamily::lognormal;
  if (name == "half_cauchy" || name == "halfcauchy") return ScaleFamily::half_cauchy;
  if (name == "half_normal" || name == "halfnormal") return ScaleFamily::half_normal;
  if (name == "half_student_t" || name == "half_t") return ScaleFamily::half_student_t;
  if (name == "uniform") return ScaleFamily::uniform;
  if (name == "truncated_normal" || name == "truncnormal") return ScaleFamily::truncated_normal;
  throw ValidationError("unknown scale prior family: " + name);
}

ScalePrior make_scale_prior(const std::string& family, std::span<const double> params) {
  const ScaleFamily f = parse_scale_family(family);
  auto need = [&](std::size_t count) {
    if (params.size() != count) {
      throw ValidationError("scale prior " + family + " takes " + std::to_string(count) + " parameter(s)");
    }
  };
  switch (f) {
    case ScaleFamily::gamma:
      need(2);
      return ScalePrior::gamma(params[0], params[1]);
    case ScaleFamily::lognormal:
      need(2);
      return ScalePrior::lognormal(params[0], params[1]);
    case ScaleFamily::half_cauchy:
      need(1);
      return ScalePrior::half_cauchy(params[0]);
    case ScaleFamily::half_normal:
      need(1);
      return ScalePrior::half_normal(params[0]);
    case ScaleFamily::half_student_t:
      need(2);
      return ScalePrior::half_student_t(params[0], params[1]);
    case ScaleFamily::uniform:
      need(2);
      return ScalePrior::uniform(params[0], params[1]);
    case ScaleFamily::truncated_normal:
      need(4);
      return ScalePrior::truncated_normal(params[0], params[1], params[2], params[3]);
  }
  throw ValidationError("unknown scale prior family: " + family);
}

std::string to_string(ScaleFamily family) {
  switch (family) {
    case ScaleFamily::gamma:
      return "gamma";
    case ScaleFamily::lognormal:
      return "lognormal";
    case ScaleFamily::half_cauchy:
      return "half_cauchy";
    case ScaleFamily::half_normal:
      return "half_normal";
    case ScaleFamily::half_student_t:
      return "half_student_t";
    case ScaleFamily::uniform:
      return "uniform";
    case ScaleFamily::truncated_normal:
      return "truncated_normal";
  }
  return "?";
}

}  // namespace nggmix
