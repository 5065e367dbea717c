#pragma once

namespace nggmix {

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

/// log Γ(-g, x) for 0 <= g < 1 and x > 0, taking log(x) so that arguments
/// below the smallest double are still representable. At g = 0 this is
/// log E_1(x).
double log_upper_gamma_neg(double g, double log_x);

/// x^{-g} e^{-x} / Γ(-g, x), i.e. -d log Γ(-g, x) / d log x.
double upper_gamma_neg_hazard(double g, double log_x);

/// Γ(-g, x); may overflow to +inf for tiny x.
double upper_gamma_neg(double g, double x);

}  // namespace nggmix
