#include "chaosgame/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaosgame/errors.hpp"

namespace chaosgame {

std::uint64_t cover_upper(const PointSet& points, double eps) {
  if (!(eps > 0.0)) throw ValidationError("cover radius must be positive");
  if (points.empty()) throw ValidationError("cannot cover an empty point set");
  SpatialGrid grid(points, eps);
  std::vector<char> covered(points.size(), 0);
  Point center(points.dim());
  std::uint64_t balls = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (covered[i]) continue;
    ++balls;
    covered[i] = 1;
    std::copy(points[i].begin(), points[i].end(), center.begin());
    center[0] += eps;
    grid.erase_within(points, center, eps, [&](std::uint32_t j) { covered[j] = 1; });
  }
  return balls;
}

std::uint64_t packing_lower(const PointSet& points, double eps) {
  if (!(eps > 0.0)) throw ValidationError("packing radius must be positive");
  if (points.empty()) throw ValidationError("cannot pack an empty point set");
  const double sep = 2.0 * eps;
  PointSet kept(points.dim());
  SpatialGrid grid(points.dim(), sep);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (grid.any_within(kept, points[i], sep)) continue;
    grid.insert(static_cast<std::uint32_t>(kept.size()), points[i]);
    kept.push_back(points[i]);
  }
  return kept.size();
}

CoverEstimate covering_estimate(const PointSet& points, double eps) {
  return {eps, packing_lower(points, eps), cover_upper(points, eps)};
}

namespace {

/// Tracks which cloud points are still farther than `radius` from every
/// orbit point seen so far.
class CoverageTracker {
 public:
  CoverageTracker(const PointSet& cloud, double radius)
      : cloud_(cloud), radius_(radius), grid_(cloud, radius), remaining_(cloud.size()) {}

  void add(std::span<const double> x) {
    grid_.erase_within(cloud_, x, radius_, [&](std::uint32_t) { --remaining_; });
  }
  bool done() const { return remaining_ == 0; }

 private:
  const PointSet& cloud_;
  double radius_;
  SpatialGrid grid_;
  std::size_t remaining_;
};

}  // namespace

RecoveryRecord recovery_time(const IfsSystem& ifs, const DriverStream& driver,
                             std::span<const double> x0, double eps, const AttractorCloud& cloud,
                             std::uint64_t cap, bool certify) {
  if (x0.size() != ifs.dim()) throw ValidationError("starting point has the wrong dimension");
  if (cloud.dim() != ifs.dim()) throw ValidationError("cloud and IFS disagree on dimension");
  if (!(eps > cloud.resolution)) {
    throw ValidationError("eps must exceed the cloud resolution to be certifiable");
  }
  RecoveryRecord rec;
  rec.eps = eps;
  rec.x0.assign(x0.begin(), x0.end());
  rec.driver_id = driver.id();
  rec.guard = cloud.resolution;
  rec.cap = cap;

  CoverageTracker main(cloud.points, eps);
  std::optional<CoverageTracker> strict;
  if (certify) strict.emplace(cloud.points, eps - cloud.resolution);

  DriverStream d = driver.clone();
  Point cur(x0.begin(), x0.end()), next(ifs.dim());
  for (std::uint64_t n = 0;; ++n) {
    if (!rec.n) {
      main.add(cur);
      if (main.done()) rec.n = n;
    }
    if (strict && !rec.n_certified) {
      strict->add(cur);
      if (strict->done()) rec.n_certified = n;
    }
    if (rec.n && (!strict || rec.n_certified)) break;
    if (n == cap) break;
    const int s = d.next();
    if (s < 1 || s > ifs.size()) throw ValidationError("invalid symbol " + std::to_string(s));
    ifs.map(s).apply(cur, next);
    std::swap(cur, next);
  }
  return rec;
}

bool orbit_covers(const PointSet& orbit_points, std::size_t n, const PointSet& cloud,
                  double eps) {
  if (n >= orbit_points.size()) throw ValidationError("orbit is shorter than requested prefix");
  PointSet prefix(orbit_points.dim());
  for (std::size_t k = 0; k <= n; ++k) prefix.push_back(orbit_points[k]);
  SpatialGrid grid(prefix, eps);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!grid.any_within(prefix, cloud[i], eps)) return false;
  }
  return true;
}

DimensionEstimate box_dimension(const AttractorCloud& cloud, double a, double r, int m_lo,
                                int m_hi) {
  if (!(a > 0.0)) throw ValidationError("dimension schedule needs a > 0");
  if (!(r > 0.0 && r < 1.0)) throw ValidationError("dimension schedule needs 0 < r < 1");
  if (m_lo > m_hi) throw ValidationError("dimension window is empty (m_lo > m_hi)");
  DimensionEstimate est;
  est.a = a;
  est.r = r;
  est.m_lo = m_lo;
  est.m_hi = m_hi;
  for (int m = m_lo; m <= m_hi; ++m) {
    const double b = a * std::pow(r, m);
    if (!(b < 1.0) || !(b > 2.0 * cloud.resolution)) continue;
    const CoverEstimate c = covering_estimate(cloud.points, b);
    const double scale = std::log(1.0 / b);
    est.samples.push_back({b, c.lower, c.upper, std::log(static_cast<double>(c.lower)) / scale,
                           std::log(static_cast<double>(c.upper)) / scale});
  }
  if (est.samples.empty()) {
    throw ValidationError("dimension window is empty after the resolution filter");
  }
  est.value = std::numeric_limits<double>::infinity();
  est.liminf_proxy = std::numeric_limits<double>::infinity();
  for (const auto& s : est.samples) {
    est.value = std::min(est.value, s.rate_upper);
    est.liminf_proxy = std::min(est.liminf_proxy, s.rate_lower);
  }
  est.bracket_width = est.value - est.liminf_proxy;
  return est;
}

std::optional<double> log_rate(std::uint64_t n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("log_rate needs 0 < eps < 1");
  if (n == 0) return std::nullopt;
  return std::log(static_cast<double>(n)) / std::log(1.0 / eps);
}

double iterated_log_rate(std::uint64_t n, double eps, int order) {
  if (order < 1) throw ValidationError("iterated log order must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("iterated_log_rate needs 0 < eps < 1");
  if (n == 0) throw ValidationError("iterated_log_rate needs n >= 1");
  double v = static_cast<double>(n);
  for (int i = 0; i < order; ++i) {
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    v = std::log(v);
  }
  return v / std::log(1.0 / eps);
}

double rate_ratio(std::uint64_t n, const RateFunction& psi, double eps) {
  const double p = psi(eps);
  if (std::isinf(p)) {
    throw CapExceeded("rate function saturated: psi(" + std::to_string(eps) + ") overflows");
  }
  if (!(p > 0.0)) throw ValidationError("rate_ratio needs psi(eps) > 0");
  return static_cast<double>(n) / p;
}

bool key_inequality_check(const RecoveryRecord& record, const CoverEstimate& cover) {
  if (record.eps != cover.eps) throw ValidationError("record and cover use different eps");
  if (!record.n) return true;
  return *record.n + 1 >= cover.lower;
}

}  // namespace chaosgame
