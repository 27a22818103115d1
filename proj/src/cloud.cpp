#include "chaosgame/cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "chaosgame/errors.hpp"

namespace chaosgame {

namespace {

constexpr std::uint32_t kCacheVersion = 1;
constexpr std::uint64_t kBootstrapPoints = std::uint64_t{1} << 16;

void sort_unique(PointSet& pts) {
  pts.sort_lexicographic();
  const std::size_t d = pts.dim();
  std::vector<double> out;
  out.reserve(pts.coords().size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && std::equal(pts[i].begin(), pts[i].end(), pts[i - 1].begin())) continue;
    out.insert(out.end(), pts[i].begin(), pts[i].end());
  }
  pts = PointSet(d, std::move(out));
}

/// Images of the seed under all words of length `depth`, exact duplicates
/// removed layer by layer.
PointSet enumerate_layer(const IfsSystem& ifs, int depth, std::uint64_t budget) {
  const Point seed = fixed_point(ifs.map(1));
  PointSet layer(ifs.dim());
  layer.push_back(seed);
  Point buf(ifs.dim());
  for (int j = 0; j < depth; ++j) {
    const std::uint64_t next_size = layer.size() * static_cast<std::uint64_t>(ifs.size());
    if (next_size > budget) {
      throw BudgetExceeded("resolution infeasible: depth " + std::to_string(depth) + " needs " +
                           std::to_string(next_size) + " points, budget " +
                           std::to_string(budget));
    }
    PointSet next(ifs.dim());
    next.reserve(next_size);
    for (int s = 1; s <= ifs.size(); ++s) {
      const AffineMap& f = ifs.map(s);
      for (std::size_t i = 0; i < layer.size(); ++i) {
        f.apply(layer[i], buf);
        next.push_back(buf);
      }
    }
    sort_unique(next);
    layer = std::move(next);
  }
  return layer;
}

/// Greedy thinning in canonical order: drops points closer than `radius` to a
/// kept one. Returns the largest distance from a dropped point to its keeper.
double thin(PointSet& pts, double radius) {
  if (!(radius > 0.0) || pts.size() < 2) return 0.0;
  PointSet kept(pts.dim());
  SpatialGrid grid(pts.dim(), radius);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    grid.for_each_within(kept, pts[i], radius, [&](std::uint32_t k) {
      nearest = std::min(nearest, distance(kept[k], pts[i]));
    });
    if (nearest < radius) {
      worst = std::max(worst, nearest);
      continue;
    }
    grid.insert(static_cast<std::uint32_t>(kept.size()), pts[i]);
    kept.push_back(pts[i]);
  }
  pts = std::move(kept);
  return worst;
}

AttractorCloud finish_cloud(PointSet pts, int depth, double base_resolution, double diam_bound) {
  AttractorCloud cloud;
  const double dropped = thin(pts, base_resolution / 4.0);
  cloud.points = std::move(pts);
  cloud.depth = depth;
  cloud.resolution = base_resolution + dropped;
  cloud.diam_lower = diameter(cloud.points);
  cloud.diam_upper = std::min(diam_bound, cloud.diam_lower + 2.0 * cloud.resolution);
  return cloud;
}

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ValidationError("truncated cloud cache file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

AttractorCloud AttractorCloud::from_points(PointSet points, double resolution) {
  if (points.empty()) throw ValidationError("cloud needs at least one point");
  if (!(resolution >= 0.0)) throw ValidationError("cloud resolution must be >= 0");
  AttractorCloud cloud;
  sort_unique(points);
  cloud.points = std::move(points);
  cloud.resolution = resolution;
  cloud.depth = 0;
  cloud.diam_lower = diameter(cloud.points);
  cloud.diam_upper = cloud.diam_lower + 2.0 * resolution;
  return cloud;
}

double attractor_diameter_bound(const IfsSystem& ifs) {
  const double L = ifs.lip_max();
  const auto k = static_cast<std::uint64_t>(ifs.size());
  // Deepen until 2 L^m <= 1/100 or the bootstrap point budget is reached,
  // whichever comes first, as long as 2 L^m < 1.
  int depth = 0;
  std::uint64_t count = 1;
  while (2.0 * std::pow(L, depth) > 0.01 && count * k <= kBootstrapPoints) {
    ++depth;
    count *= k;
  }
  while (!(2.0 * std::pow(L, depth) < 1.0)) ++depth;
  const PointSet layer = enumerate_layer(ifs, depth, kDefaultPointBudget);
  return diameter(layer) / (1.0 - 2.0 * std::pow(L, depth));
}

AttractorCloud build_cloud_at_depth(const IfsSystem& ifs, int depth, std::uint64_t point_budget) {
  if (depth < 0) throw ValidationError("cloud depth must be >= 0");
  const double bound = attractor_diameter_bound(ifs);
  PointSet layer = enumerate_layer(ifs, depth, point_budget);
  return finish_cloud(std::move(layer), depth, std::pow(ifs.lip_max(), depth) * bound, bound);
}

AttractorCloud build_cloud(const IfsSystem& ifs, double target_resolution,
                           std::uint64_t point_budget) {
  if (!(target_resolution > 0.0)) throw ValidationError("target resolution must be positive");
  const double bound = attractor_diameter_bound(ifs);
  const double L = ifs.lip_max();
  int depth = 0;
  while (std::pow(L, depth) * bound > target_resolution) ++depth;
  PointSet layer = enumerate_layer(ifs, depth, point_budget);
  return finish_cloud(std::move(layer), depth, std::pow(L, depth) * bound, bound);
}

double hausdorff_distance(const PointSet& a, const PointSet& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double distance_to_cloud(const AttractorCloud& cloud, std::span<const double> x) {
  KdTree tree(cloud.points);
  return tree.nearest(x).distance;
}

void write_cloud_cache(const AttractorCloud& cloud, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot write cloud cache " + path.string());
  os.write("IFSC", 4);
  put<std::uint32_t>(os, kCacheVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cloud.dim()));
  put<std::uint64_t>(os, cloud.size());
  put<double>(os, cloud.resolution);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cloud.depth));
  for (double v : cloud.points.coords()) put<double>(os, v);
  if (!os) throw ValidationError("failed writing cloud cache " + path.string());
}

AttractorCloud read_cloud_cache(const std::filesystem::path& path, const IfsSystem* ifs) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open cloud cache " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "IFSC", 4) != 0) {
    throw ValidationError("not a cloud cache file: " + path.string());
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kCacheVersion) {
    throw ValidationError("unsupported cloud cache version " + std::to_string(version));
  }
  const auto dim = get<std::uint32_t>(is);
  const auto count = get<std::uint64_t>(is);
  const auto resolution = get<double>(is);
  const auto depth = get<std::uint32_t>(is);
  if (dim == 0 || dim > kMaxDim) throw ValidationError("bad dimension in cloud cache");
  std::vector<double> coords(count * dim);
  for (double& v : coords) v = get<double>(is);

  AttractorCloud cloud;
  cloud.points = PointSet(dim, std::move(coords));
  cloud.resolution = resolution;
  cloud.depth = static_cast<int>(depth);
  cloud.diam_lower = diameter(cloud.points);
  const double bound = ifs ? attractor_diameter_bound(*ifs) : std::numeric_limits<double>::infinity();
  cloud.diam_upper = std::min(bound, cloud.diam_lower + 2.0 * resolution);
  return cloud;
}

}  // namespace chaosgame
