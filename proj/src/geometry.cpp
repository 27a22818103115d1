#include "chaosgame/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>

#include "chaosgame/errors.hpp"

namespace chaosgame {

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0) {
    throw ValidationError("point coordinates do not divide into dimension " +
                          std::to_string(dim_));
  }
}

void PointSet::push_back(std::span<const double> p) {
  if (p.size() != dim_) throw ValidationError("point dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

bool lexicographic_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void PointSet::sort_lexicographic() {
  const std::size_t n = size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (dim_ == 1) {
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return coords_[a] < coords_[b]; });
  } else {
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return lexicographic_less((*this)[a], (*this)[b]);
    });
  }
  std::vector<double> sorted;
  sorted.reserve(coords_.size());
  for (std::uint32_t i : order) {
    auto p = (*this)[i];
    sorted.insert(sorted.end(), p.begin(), p.end());
  }
  coords_ = std::move(sorted);
}

// ---------------------------------------------------------------------------

SpatialGrid::SpatialGrid(std::size_t dim, double cell) : dim_(dim), cell_(cell) {
  if (!(cell > 0.0) || !std::isfinite(cell)) throw ValidationError("grid cell size must be positive");
  if (dim == 0 || dim > kMaxDim) throw ValidationError("unsupported dimension " + std::to_string(dim));
  keys_.assign(64, 0);
  heads_.assign(64, kNil);
}

SpatialGrid::SpatialGrid(const PointSet& points, double cell) : SpatialGrid(points.dim(), cell) {
  next_.reserve(points.size());
  // Reverse order keeps each bucket list in ascending index order.
  for (std::size_t i = points.size(); i-- > 0;) {
    insert(static_cast<std::uint32_t>(i), points[i]);
  }
}

void SpatialGrid::cell_of(std::span<const double> p, std::array<std::int64_t, kMaxDim>& out) const {
  constexpr double kLimit = 4.0e18;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double c = std::floor(p[i] / cell_);
    out[i] = static_cast<std::int64_t>(std::clamp(c, -kLimit, kLimit));
  }
}

std::uint64_t SpatialGrid::key_of_cell(std::span<const std::int64_t> cell) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::int64_t c : cell) {
    std::uint64_t z = h ^ (static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h = z ^ (z >> 31);
  }
  return h | 1u;
}

std::size_t SpatialGrid::find_slot(std::uint64_t key) const {
  const std::size_t mask = keys_.size() - 1;
  for (std::size_t s = key & mask;; s = (s + 1) & mask) {
    if (keys_[s] == key) return s;
    if (keys_[s] == 0) return kNoSlot;
  }
}

std::size_t SpatialGrid::claim_slot(std::uint64_t key) {
  if (2 * (used_ + 1) > keys_.size()) grow();
  const std::size_t mask = keys_.size() - 1;
  for (std::size_t s = key & mask;; s = (s + 1) & mask) {
    if (keys_[s] == key) return s;
    if (keys_[s] == 0) {
      keys_[s] = key;
      ++used_;
      return s;
    }
  }
}

void SpatialGrid::grow() {
  std::vector<std::uint64_t> old_keys(keys_.size() * 2, 0);
  std::vector<std::uint32_t> old_heads(heads_.size() * 2, kNil);
  old_keys.swap(keys_);
  old_heads.swap(heads_);
  const std::size_t mask = keys_.size() - 1;
  for (std::size_t i = 0; i < old_keys.size(); ++i) {
    if (old_keys[i] == 0) continue;
    std::size_t s = old_keys[i] & mask;
    while (keys_[s] != 0) s = (s + 1) & mask;
    keys_[s] = old_keys[i];
    heads_[s] = old_heads[i];
  }
}

void SpatialGrid::insert(std::uint32_t index, std::span<const double> p) {
  std::array<std::int64_t, kMaxDim> cell{};
  cell_of(p, cell);
  const std::size_t slot = claim_slot(key_of_cell({cell.data(), dim_}));
  if (next_.size() <= index) next_.resize(std::max<std::size_t>(index + 1, next_.size() * 2), kNil);
  next_[index] = heads_[slot];
  heads_[slot] = index;
}

bool SpatialGrid::any_within(const PointSet& points, std::span<const double> q, double radius) const {
  const double r2 = radius * radius;
  bool found = false;
  for_each_neighbor_key(q, radius, [&](std::uint64_t key) {
    if (found) return;
    const std::size_t slot = find_slot(key);
    if (slot == kNoSlot) return;
    for (std::uint32_t i = heads_[slot]; i != kNil; i = next_[i]) {
      if (squared_distance(points[i], q) <= r2) {
        found = true;
        return;
      }
    }
  });
  return found;
}

// ---------------------------------------------------------------------------

KdTree::KdTree(const PointSet& points) : points_(&points) {
  if (points.empty()) throw ValidationError("k-d tree over an empty point set");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points.size() / 8 + 1);
  build(0, static_cast<std::uint32_t>(points.size()), 0);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t depth) {
  constexpr std::uint32_t kLeaf = 8;
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeaf) return id;
  const auto axis = static_cast<std::uint32_t>(depth % points_->dim());
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return (*points_)[a][axis] < (*points_)[b][axis];
                   });
  const double split = (*points_)[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t id, std::span<const double> q, Hit& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = distance((*points_)[order_[i]], q);
      if (d < best.distance || (d == best.distance && order_[i] < best.index)) {
        best = {order_[i], d};
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search(near, q, best);
  if (std::abs(diff) <= best.distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(std::span<const double> q) const {
  Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search(0, q, best);
  return best;
}

// ---------------------------------------------------------------------------

namespace {

double brute_diameter(const PointSet& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, squared_distance(pts[i], pts[j]));
    }
  }
  return std::sqrt(best);
}

struct Box {
  std::array<double, kMaxDim> lo, hi;
  std::vector<std::uint32_t> members;
};

double box_far_distance(const Box& a, const Box& b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double t = std::max(a.hi[i] - b.lo[i], b.hi[i] - a.lo[i]);
    s += t * t;
  }
  return std::sqrt(s);
}

}  // namespace

double diameter(const PointSet& pts) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.dim();
  if (n < 2) return 0.0;
  if (dim == 1) {
    const auto [lo, hi] = std::minmax_element(pts.coords().begin(), pts.coords().end());
    return *hi - *lo;
  }
  if (n <= 2048) return brute_diameter(pts);

  // Branch and bound over a coarse grid of cells: a cell pair can only raise the
  // answer if the far distance of their bounding boxes beats the current best.
  std::array<double, kMaxDim> lo{}, hi{};
  for (std::size_t a = 0; a < dim; ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -lo[a];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], pts[i][a]);
      hi[a] = std::max(hi[a], pts[i][a]);
    }
  }
  const auto per_axis = static_cast<std::size_t>(
      std::max(1.0, std::floor(std::pow(4096.0, 1.0 / static_cast<double>(dim)))));
  std::unordered_map<std::uint64_t, Box> cells;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t key = 0;
    for (std::size_t a = 0; a < dim; ++a) {
      const double extent = hi[a] - lo[a];
      std::size_t c = 0;
      if (extent > 0) {
        c = std::min(per_axis - 1,
                     static_cast<std::size_t>((pts[i][a] - lo[a]) / extent * per_axis));
      }
      key = key * per_axis + c;
    }
    auto [it, fresh] = cells.try_emplace(key);
    Box& box = it->second;
    if (fresh) {
      for (std::size_t a = 0; a < dim; ++a) box.lo[a] = box.hi[a] = pts[i][a];
    } else {
      for (std::size_t a = 0; a < dim; ++a) {
        box.lo[a] = std::min(box.lo[a], pts[i][a]);
        box.hi[a] = std::max(box.hi[a], pts[i][a]);
      }
    }
    box.members.push_back(static_cast<std::uint32_t>(i));
  }

  // Lower bound from a few farthest-point sweeps.
  double best2 = 0.0;
  std::size_t anchor = 0;
  for (int sweep = 0; sweep < 4; ++sweep) {
    std::size_t far = anchor;
    double far2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = squared_distance(pts[anchor], pts[i]);
      if (d2 > far2) {
        far2 = d2;
        far = i;
      }
    }
    best2 = std::max(best2, far2);
    anchor = far;
  }
  double best = std::sqrt(best2);

  std::vector<const Box*> boxes;
  boxes.reserve(cells.size());
  for (const auto& [key, box] : cells) boxes.push_back(&box);
  struct Pair {
    double bound;
    std::uint32_t a, b;
  };
  std::vector<Pair> pairs;
  for (std::uint32_t i = 0; i < boxes.size(); ++i) {
    for (std::uint32_t j = i; j < boxes.size(); ++j) {
      const double bound = box_far_distance(*boxes[i], *boxes[j], dim);
      if (bound > best) pairs.push_back({bound, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.bound != y.bound) return x.bound > y.bound;
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  for (const Pair& p : pairs) {
    if (p.bound <= best) break;
    for (std::uint32_t u : boxes[p.a]->members) {
      for (std::uint32_t v : boxes[p.b]->members) {
        best2 = std::max(best2, squared_distance(pts[u], pts[v]));
      }
    }
    best = std::sqrt(best2);
  }
  return best;
}

double directed_hausdorff(const PointSet& from, const PointSet& to) {
  if (from.empty() || to.empty()) throw ValidationError("Hausdorff distance of an empty set");
  if (from.dim() != to.dim()) throw ValidationError("Hausdorff distance across dimensions");
  KdTree tree(to);
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    worst = std::max(worst, tree.nearest(from[i]).distance);
  }
  return worst;
}

}  // namespace chaosgame
