#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chaosgame {

using Point = std::vector<double>;

/// Largest supported ambient dimension.
inline constexpr std::size_t kMaxDim = 8;

/// Dense row-major storage for a set of points in R^d.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords_.data() + i * dim_, dim_};
  }

  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }
  void clear() { coords_.clear(); }

  const std::vector<double>& coords() const { return coords_; }

  Point point(std::size_t i) const {
    auto p = (*this)[i];
    return {p.begin(), p.end()};
  }

  /// Reorders points lexicographically by coordinates.
  void sort_lexicographic();

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

bool lexicographic_less(std::span<const double> a, std::span<const double> b);

/// Uniform hash grid over point indices. Cells that hash to the same key
/// share a bucket; every query filters by true distance, so collisions only
/// cost time. Buckets are intrusive linked lists threaded through the point
/// indices, so an index may be stored at most once.
class SpatialGrid {
 public:
  SpatialGrid(std::size_t dim, double cell);
  SpatialGrid(const PointSet& points, double cell);

  double cell() const { return cell_; }
  std::size_t dim() const { return dim_; }

  void insert(std::uint32_t index, std::span<const double> p);

  /// Calls f(index) for every stored index whose point lies within `radius`
  /// (closed ball) of q.
  template <class F>
  void for_each_within(const PointSet& points, std::span<const double> q, double radius,
                       F&& f) const {
    const double r2 = radius * radius;
    for_each_neighbor_key(q, radius, [&](std::uint64_t key) {
      const std::size_t slot = find_slot(key);
      if (slot == kNoSlot) return;
      for (std::uint32_t i = heads_[slot]; i != kNil; i = next_[i]) {
        if (squared_distance(points[i], q) <= r2) f(i);
      }
    });
  }

  /// True if any stored point lies within `radius` of q.
  bool any_within(const PointSet& points, std::span<const double> q, double radius) const;

  /// Removes every stored index within `radius` of q, calling f(index) for each.
  template <class F>
  void erase_within(const PointSet& points, std::span<const double> q, double radius, F&& f) {
    const double r2 = radius * radius;
    for_each_neighbor_key(q, radius, [&](std::uint64_t key) {
      const std::size_t slot = find_slot(key);
      if (slot == kNoSlot) return;
      std::uint32_t* link = &heads_[slot];
      while (*link != kNil) {
        const std::uint32_t i = *link;
        if (squared_distance(points[i], q) <= r2) {
          *link = next_[i];
          f(i);
        } else {
          link = &next_[i];
        }
      }
    });
  }

 private:
  static constexpr std::uint32_t kNil = UINT32_MAX;
  static constexpr std::size_t kNoSlot = SIZE_MAX;

  std::uint64_t key_of_cell(std::span<const std::int64_t> cell) const;
  void cell_of(std::span<const double> p, std::array<std::int64_t, kMaxDim>& out) const;
  std::size_t find_slot(std::uint64_t key) const;
  std::size_t claim_slot(std::uint64_t key);
  void grow();

  template <class F>
  void for_each_neighbor_key(std::span<const double> q, double radius, F&& f) const {
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
    std::array<std::int64_t, kMaxDim> base{}, cur{}, offset{};
    cell_of(q, base);
    offset.fill(-reach);
    // Distinct cells may collide in the hash; dedupe keys so no bucket is
    // visited twice for one query.
    std::array<std::uint64_t, 64> small;
    std::vector<std::uint64_t> large;
    std::size_t count = 0;
    auto push = [&](std::uint64_t key) {
      if (count < small.size()) {
        small[count] = key;
      } else {
        if (large.empty()) large.assign(small.begin(), small.end());
        large.push_back(key);
      }
      ++count;
    };
    while (true) {
      for (std::size_t i = 0; i < dim_; ++i) cur[i] = base[i] + offset[i];
      push(key_of_cell({cur.data(), dim_}));
      std::size_t axis = 0;
      while (axis < dim_ && ++offset[axis] > reach) {
        offset[axis] = -reach;
        ++axis;
      }
      if (axis == dim_) break;
    }
    std::uint64_t* first = large.empty() ? small.data() : large.data();
    std::uint64_t* last = first + count;
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto* k = first; k != last; ++k) f(*k);
  }

  std::size_t dim_;
  double cell_;
  // Open addressing, linear probing; key 0 marks an empty slot.
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> heads_;
  std::size_t used_ = 0;
  std::vector<std::uint32_t> next_;
};

/// Static k-d tree for nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const PointSet& points);

  struct Hit {
    std::size_t index;
    double distance;
  };
  Hit nearest(std::span<const double> q) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    std::int32_t left = -1, right = -1;
    std::uint32_t axis = 0;
    double split = 0.0;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t depth);
  void search(std::int32_t node, std::span<const double> q, Hit& best) const;

  const PointSet* points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Exact maximum pairwise distance.
double diameter(const PointSet& points);

/// Directed distance sup_{a in from} inf_{b in to} |a - b|.
double directed_hausdorff(const PointSet& from, const PointSet& to);

}  // namespace chaosgame
