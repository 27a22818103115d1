#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace chaosgame {

/// psi(eps) = (1/eps)^z.
struct PowerRate {
  double z;
  friend bool operator==(const PowerRate&, const PowerRate&) = default;
};

/// psi(eps) = exp^{(n-1)}(1/eps), with exp^{(0)} the identity.
struct IterExpRate {
  int n;
  friend bool operator==(const IterExpRate&, const IterExpRate&) = default;
};

/// psi(eps) = K * alpha * D^q * (1/eps)^q with q = ln K / ln(1/L) and
/// D = diam A + d(x0, A).
struct BoundingRate {
  int alphabet;
  int alpha;
  double base_distance;
  double exponent;
  friend bool operator==(const BoundingRate&, const BoundingRate&) = default;
};

/// Sampled (eps, psi) pairs, interpolated linearly in log-log space and
/// extrapolated with the slope of the nearest end segment.
struct TableRate {
  std::vector<std::pair<double, double>> samples;  // sorted by eps, descending
  friend bool operator==(const TableRate&, const TableRate&) = default;
};

class RateFunction {
 public:
  using Kind = std::variant<PowerRate, IterExpRate, BoundingRate, TableRate>;

  explicit RateFunction(Kind kind);

  static RateFunction power(double z) { return RateFunction(PowerRate{z}); }
  static RateFunction iterexp(int n) { return RateFunction(IterExpRate{n}); }
  /// Bounding function for an IFS with K maps and contraction L.
  static RateFunction bounding(int alphabet, double lip, double diam, double dist_to_attractor);
  static RateFunction table(std::vector<std::pair<double, double>> samples);

  /// Parses "power:Z", "iterexp:N", "bounding:K,ALPHA,D,Q" or
  /// "table:EPS=VALUE,EPS=VALUE,...".
  static RateFunction parse(std::string_view text);

  /// Canonical text accepted by parse().
  std::string to_string() const;

  /// +inf when the value overflows a double.
  double operator()(double eps) const;

  const Kind& kind() const { return kind_; }

  friend bool operator==(const RateFunction&, const RateFunction&) = default;

 private:
  void validate() const;
  Kind kind_;
};

}  // namespace chaosgame
