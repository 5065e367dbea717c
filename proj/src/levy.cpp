#include "nggmix/levy.hpp"

#include <cmath>
#include <sstream>

#include "nggmix/special.hpp"

namespace nggmix {

void NggParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("NGG alpha must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("NGG kappa must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("NGG gamma must lie in [0, 1)");
  if (kappa == 0.0 && gamma == 0.0) throw ValidationError("NGG (kappa, gamma) must not both be 0");
}

double log_levy_tail_mass(double log_v, const NggParams& p, double u) {
  const double lambda = p.kappa + u;
  const double g = p.gamma;
  const double log_norm = std::log(p.alpha) - std::lgamma(1.0 - g);
  if (lambda == 0.0) {
    // Pure stable: N(v) = α v^{-γ} / (γ Γ(1-γ)).
    return log_norm - g * log_v - std::log(g);
  }
  const double log_lambda = std::log(lambda);
  return log_norm + g * log_lambda + log_upper_gamma_neg(g, log_lambda + log_v);
}

TailMass levy_tail_mass_checked(double v, const NggParams& p, double u) {
  if (std::isinf(v)) return {0.0, false};
  if (!(v > 0.0)) return {kTailMassCeiling, true};
  const double log_n = log_levy_tail_mass(std::log(v), p, u);
  if (log_n >= std::log(kTailMassCeiling)) return {kTailMassCeiling, true};
  return {std::exp(log_n), false};
}

double levy_tail_mass(double v, const NggParams& p, double u) {
  return levy_tail_mass_checked(v, p, u).value;
}

namespace {

// d log N(e^t) / dt.
double dlog_tail(double log_v, const NggParams& p, double u) {
  const double lambda = p.kappa + u;
  if (lambda == 0.0) return -p.gamma;
  return -upper_gamma_neg_hazard(p.gamma, std::log(lambda) + log_v);
}

[[noreturn]] void bracket_failure(double xi, double lo, double hi) {
  std::ostringstream os;
  os << "tail-mass inversion failed for xi=" << xi << ": bracket [log v] = [" << lo << ", "
     << hi << "]";
  throw SamplingError(os.str());
}

}  // namespace

double invert_tail_mass_log(double xi, const NggParams& p, double u, double upper_log_bound) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw ValidationError("invert_tail_mass: xi must be > 0");
  const double log_xi = std::log(xi);

  // Small-v asymptotics for the starting point.
  double t0;
  if (p.gamma > 0.0) {
    t0 = -(log_xi - std::log(p.alpha) + std::log(p.gamma) + std::lgamma(1.0 - p.gamma)) / p.gamma;
  } else {
    t0 = -xi / p.alpha - kEulerGamma - std::log(p.kappa + u);
  }
  const bool has_upper = std::isfinite(upper_log_bound);
  if (has_upper && t0 >= upper_log_bound) t0 = upper_log_bound - 1.0;

  auto f = [&](double t) { return log_levy_tail_mass(t, p, u) - log_xi; };

  // f is strictly decreasing in t: find lo with f(lo) > 0 and hi with f(hi) < 0.
  double lo, hi;
  const double f0 = f(t0);
  if (f0 == 0.0) return t0;
  if (f0 > 0.0) {
    lo = t0;
    if (has_upper) {
      hi = upper_log_bound;
    } else {
      double step = 1.0;
      hi = lo + step;
      for (int guard = 0; f(hi) > 0.0; ++guard) {
        if (guard > 200) bracket_failure(xi, lo, hi);
        lo = hi;
        step *= 2.0;
        hi = lo + step;
      }
    }
  } else {
    hi = t0;
    double step = 1.0;
    lo = hi - step;
    for (int guard = 0; f(lo) < 0.0; ++guard) {
      if (guard > 200) bracket_failure(xi, lo, hi);
      hi = lo;
      step *= 2.0;
      lo = hi - step;
    }
  }

  // Newton on log N(e^t), falling back to bisection when the step leaves the
  // bracket or fails to halve it.
  double t = 0.5 * (lo + hi);
  double ft = f(t);
  double dx_old = hi - lo;
  double dx = dx_old;
  for (int iter = 0; iter < 400; ++iter) {
    if (std::fabs(ft) <= 0.1 * kInversionTolerance) break;
    const double slope = dlog_tail(t, p, u);
    const bool newton_ok = std::isfinite(slope) && slope < 0.0 &&
                           ((t - hi) * slope - ft) * ((t - lo) * slope - ft) < 0.0 &&
                           std::fabs(2.0 * ft) <= std::fabs(dx_old * slope);
    dx_old = dx;
    if (newton_ok) {
      dx = ft / slope;
      t -= dx;
    } else {
      dx = 0.5 * (hi - lo);
      t = lo + dx;
    }
    ft = f(t);
    if (ft > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t))) {
      break;
    }
  }
  if (!(std::fabs(ft) <= kInversionTolerance) &&
      hi - lo > 1e-12 * std::max(1.0, std::fabs(t))) {
    bracket_failure(xi, lo, hi);
  }
  if (has_upper && t >= upper_log_bound) {
    t = std::nextafter(upper_log_bound, -std::numeric_limits<double>::infinity());
  }
  return t;
}

double invert_tail_mass(double xi, const NggParams& p, double u) {
  return std::exp(invert_tail_mass_log(xi, p, u));
}

double JumpSeries::total() const {
  double s = 0.0;
  for (double lj : log_jumps) s += std::exp(lj);
  return s;
}

JumpSeries sample_unfixed_jumps(const NggParams& p, double u, std::size_t q, Rng& rng) {
  if (q == 0) throw ValidationError("sample_unfixed_jumps: Q must be >= 1");
  JumpSeries series;
  series.tilt = u;
  series.log_jumps.reserve(q);
  std::exponential_distribution<double> arrival(1.0);
  double xi = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q; ++j) {
    xi += arrival(rng);
    prev = invert_tail_mass_log(xi, p, u, prev);
    series.log_jumps.push_back(prev);
  }
  return series;
}

}  // namespace nggmix
