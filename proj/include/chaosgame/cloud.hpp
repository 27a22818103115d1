#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "chaosgame/geometry.hpp"
#include "chaosgame/ifs.hpp"

namespace chaosgame {

inline constexpr std::uint64_t kDefaultPointBudget = std::uint64_t{1} << 24;

/// Finite sample of an attractor A with a certified resolution.
///
/// Every point lies in A (up to floating point), and every point of A lies
/// within `resolution` of some point. Points are in lexicographic order.
struct AttractorCloud {
  PointSet points;
  double resolution = 0.0;
  int depth = 0;            // word length used to generate the points; 0 for fixtures
  double diam_lower = 0.0;  // max pairwise distance over `points`
  double diam_upper = 0.0;  // certified upper bound on diam A

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.dim(); }

  /// Wraps an explicit point list already known to lie in A and to be
  /// `resolution`-dense in it.
  static AttractorCloud from_points(PointSet points, double resolution);
};

/// diam A <= diam(C_m) / (1 - 2 L^m) from a modest bootstrap depth m.
double attractor_diameter_bound(const IfsSystem& ifs);

/// Cloud at the smallest depth m with L^m * diam_upper <= target_resolution.
AttractorCloud build_cloud(const IfsSystem& ifs, double target_resolution,
                           std::uint64_t point_budget = kDefaultPointBudget);

/// Cloud from all words of exactly `depth` symbols applied to the fixed point
/// of map 1.
AttractorCloud build_cloud_at_depth(const IfsSystem& ifs, int depth,
                                    std::uint64_t point_budget = kDefaultPointBudget);

/// Symmetric Hausdorff distance between two nonempty point sets.
double hausdorff_distance(const PointSet& a, const PointSet& b);

/// Distance from x to the nearest cloud point (an upper bound on d(x, A)).
double distance_to_cloud(const AttractorCloud& cloud, std::span<const double> x);

/// Little-endian binary cache: "IFSC", u32 version, u32 dim, u64 count,
/// f64 resolution, u32 depth, then count*dim f64 coordinates.
void write_cloud_cache(const AttractorCloud& cloud, const std::filesystem::path& path);

/// Reads a cache file. When `ifs` is given the diameter bound is recomputed
/// exactly as build_cloud does, so a warm cache reproduces a cold build.
AttractorCloud read_cloud_cache(const std::filesystem::path& path,
                                const IfsSystem* ifs = nullptr);

}  // namespace chaosgame
