#include "nggmix/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

namespace nggmix {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;

// Legendre continued fraction for Γ(a, x), modified Lentz. Converges for any
// real a once x >= 1 > a + 1. Returns h with Γ(a, x) = e^{-x} x^a h.
double upper_gamma_cf_factor(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Σ_{k>=1} (-x)^k / (k! (k - g)), the lower-gamma series without its k = 0 term.
double lower_series_tail(double g, double x) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / (k - g);
    sum += add;
    if (std::fabs(add) <= kEps * std::fabs(sum)) break;
  }
  return sum;
}

}  // namespace

double log_upper_gamma_neg(double g, double log_x) {
  const double x = std::exp(log_x);
  if (x >= 1.0) return -x - g * log_x + std::log(upper_gamma_cf_factor(-g, x));

  // Γ(-g, x) = (x^{-g} - Γ(1-g)) / g - x^{-g} T,  T = lower_series_tail.
  const double tail = lower_series_tail(g, x);
  if (g == 0.0) return std::log(-log_x - kEulerGamma - tail);

  const double neg_g_log_x = -g * log_x;
  if (neg_g_log_x < 600.0) {
    // expm1 / tgamma1pm1 keep the g -> 0 limit accurate.
    const double head =
        std::expm1(neg_g_log_x) / g - boost::math::tgamma1pm1(-g) / g;
    return std::log(head - std::exp(neg_g_log_x) * tail);
  }
  // x^{-g} dominates; factor it out to avoid overflow.
  const double main = 1.0 / g - tail;
  const double rest = -std::tgamma(1.0 - g) / g * std::exp(-neg_g_log_x) / main;
  return neg_g_log_x + std::log(main) + std::log1p(rest);
}

double upper_gamma_neg_hazard(double g, double log_x) {
  const double x = std::exp(log_x);
  if (x >= 1.0) return 1.0 / upper_gamma_cf_factor(-g, x);
  return std::exp(-g * log_x - x - log_upper_gamma_neg(g, log_x));
}

double upper_gamma_neg(double g, double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::infinity();
  return std::exp(log_upper_gamma_neg(g, std::log(x)));
}

}  // namespace nggmix
