#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "chaosgame/geometry.hpp"
#include "chaosgame/words.hpp"

namespace chaosgame {

/// x -> M x + b on R^d, with `lip` the operator 2-norm of M.
class AffineMap {
 public:
  /// `matrix` is row-major d x d.
  AffineMap(std::size_t dim, std::vector<double> matrix, std::vector<double> offset);

  /// x -> scale * x + offset.
  static AffineMap scaling(double scale, std::vector<double> offset);

  std::size_t dim() const { return dim_; }
  const std::vector<double>& matrix() const { return matrix_; }
  const std::vector<double>& offset() const { return offset_; }
  double lip() const { return lip_; }

  /// out = M in + b. `out` must not alias `in`.
  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      double s = offset_[r];
      const double* row = matrix_.data() + r * dim_;
      for (std::size_t c = 0; c < dim_; ++c) s += row[c] * in[c];
      out[r] = s;
    }
  }

  Point operator()(std::span<const double> x) const;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;

 private:
  std::size_t dim_;
  std::vector<double> matrix_;
  std::vector<double> offset_;
  double lip_;
};

/// Finite family of affine Banach contractions indexed 1..K.
class IfsSystem {
 public:
  explicit IfsSystem(std::vector<AffineMap> maps);

  std::size_t dim() const { return dim_; }
  int size() const { return static_cast<int>(maps_.size()); }
  double lip_max() const { return lip_max_; }

  /// 1-based, matching driver symbols.
  const AffineMap& map(int symbol) const { return maps_.at(static_cast<std::size_t>(symbol - 1)); }
  const std::vector<AffineMap>& maps() const { return maps_; }

  friend bool operator==(const IfsSystem&, const IfsSystem&) = default;

 private:
  std::vector<AffineMap> maps_;
  std::size_t dim_;
  double lip_max_;
};

/// Solves x = M x + b; falls back to iteration if I - M is singular.
Point fixed_point(const AffineMap& map);

struct Orbit {
  Point start;
  PointSet points;  // x_0 .. x_n
  Word driver_prefix;
};

/// x_k = f_{i_k}(x_{k-1}) for k = 1..n, consuming exactly n symbols.
Orbit run_orbit(const IfsSystem& ifs, DriverStream& driver, std::span<const double> x0,
                std::size_t n);

/// Built-in systems: "cantor", "segment", "example4", "sierpinski",
/// "single" ({x/2}) and "collapse" ({x/2, x/3}).
IfsSystem named_ifs(std::string_view name);

}  // namespace chaosgame
