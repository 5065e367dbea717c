#pragma once

#include <optional>
#include <string>

namespace nggmix {

enum class Censoring { exact, left_censored, right_censored, interval };

/// One data point. Left-censored values are known to be <= right;
/// right-censored values are known to be >= left.
class Observation {
 public:
  static Observation exact(double x);
  static Observation left_censored(double right);
  static Observation right_censored(double left);
  static Observation interval(double left, double right);
  /// Builds from optional bounds: equal bounds give an exact value, a missing
  /// bound gives the matching one-sided censoring.
  static Observation from_bounds(std::optional<double> left, std::optional<double> right);

  Censoring kind() const { return kind_; }
  std::optional<double> left() const { return left_; }
  std::optional<double> right() const { return right_; }
  bool is_exact() const { return kind_ == Censoring::exact; }
  double value() const { return *left_; }  // exact only

  /// A finite point representing the observation: the value, the interval
  /// midpoint, or the single known bound.
  double representative() const;

  bool operator==(const Observation&) const = default;

 private:
  Observation(Censoring kind, std::optional<double> left, std::optional<double> right)
      : kind_(kind), left_(left), right_(right) {}

  Censoring kind_;
  std::optional<double> left_;
  std::optional<double> right_;
};

std::string to_string(Censoring kind);

}  // namespace nggmix
