#include "chaosgame/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "chaosgame/errors.hpp"
#include "chaosgame/metrics.hpp"
#include "chaosgame/text.hpp"

namespace chaosgame {

namespace {

bool has_close_pair(const PointSet& pts, double limit) {
  if (!(limit > 0.0) || pts.size() < 2) return false;
  SpatialGrid grid(pts.dim(), limit);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool found = false;
    grid.for_each_within(pts, pts[i], limit, [&](std::uint32_t j) {
      if (distance(pts[j], pts[i]) < limit) found = true;
    });
    if (found) return true;
    grid.insert(static_cast<std::uint32_t>(i), pts[i]);
  }
  return false;
}

PointSet outside_ball(const PointSet& pts, std::span<const double> center, double radius) {
  PointSet out(pts.dim());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (distance(pts[i], center) > radius) out.push_back(pts[i]);
  }
  return out;
}

}  // namespace

BaseMapChoice choose_base_map(const IfsSystem& ifs, const AttractorCloud& cloud, int threshold) {
  const std::string failure = "attractor appears finite or concentrated at all fixed points";
  if (threshold < 1) throw ValidationError("outside threshold must be >= 1");
  if (cloud.size() < 2 * static_cast<std::size_t>(threshold)) {
    throw ValidationError(failure + " (cloud has " + std::to_string(cloud.size()) + " points)");
  }
  const double delta = cloud.diam_lower / 4.0;
  for (int s = 1; s <= ifs.size(); ++s) {
    const Point x = fixed_point(ifs.map(s));
    const PointSet outside = outside_ball(cloud.points, x, delta);
    if (outside.size() < static_cast<std::size_t>(threshold)) continue;
    if (!has_close_pair(outside, 2.0 * cloud.resolution)) continue;
    return {s, x, delta, outside.size()};
  }
  throw ValidationError(failure);
}

double c_scale(const IfsSystem& ifs, const AttractorCloud& cloud, int m) {
  return std::pow(ifs.lip_max(), m) * (cloud.diam_upper + 1.0);
}

PointSet addressed_points(const IfsSystem& ifs, int m, std::uint64_t budget) {
  if (m < 0) throw ValidationError("address depth must be >= 0");
  const auto total = checked_power(static_cast<std::uint64_t>(ifs.size()), static_cast<unsigned>(m),
                                   budget);
  if (!total) {
    throw BudgetExceeded("address table K^" + std::to_string(m) + " exceeds budget " +
                         std::to_string(budget));
  }
  PointSet layer(ifs.dim());
  layer.push_back(fixed_point(ifs.map(1)));
  Point buf(ifs.dim());
  for (int j = 0; j < m; ++j) {
    // Prepending a_1 = s makes it the most significant digit.
    PointSet next(ifs.dim());
    next.reserve(layer.size() * static_cast<std::size_t>(ifs.size()));
    for (int s = 1; s <= ifs.size(); ++s) {
      for (std::size_t i = 0; i < layer.size(); ++i) {
        ifs.map(s).apply(layer[i], buf);
        next.push_back(buf);
      }
    }
    layer = std::move(next);
  }
  return layer;
}

Word build_sigma(const IfsSystem& ifs, const AttractorCloud& cloud, double d, int m,
                 std::uint64_t budget) {
  if (!(d > 0.0)) throw ValidationError("sigma cover radius must be positive");
  if (m < 1) throw ValidationError("sigma depth must be >= 1");
  const PointSet addr = addressed_points(ifs, m, budget);
  const SpatialGrid addr_grid(addr, d);
  std::optional<KdTree> tree;
  SpatialGrid cloud_grid(cloud.points, d);
  std::vector<char> covered(cloud.size(), 0);
  const auto k = static_cast<std::uint64_t>(ifs.size());

  Word sigma{{}, ifs.size()};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (covered[i]) continue;
    const auto p = cloud.points[i];
    std::size_t best = addr.size();
    addr_grid.for_each_within(addr, p, d, [&](std::uint32_t j) {
      if (best == addr.size() || addr[j][0] > addr[best][0] ||
          (addr[j][0] == addr[best][0] && j < best)) {
        best = j;
      }
    });
    if (best == addr.size()) {
      if (!tree) tree.emplace(addr);
      best = tree->nearest(p).index;
    }
    covered[i] = 1;
    cloud_grid.erase_within(cloud.points, addr[best], d, [&](std::uint32_t j) { covered[j] = 1; });
    std::uint64_t code = best;
    for (int j = 0; j < m; ++j) {
      sigma.symbols.push_back(static_cast<int>(code % k) + 1);
      code /= k;
    }
  }
  return sigma;
}

namespace {

struct ScaleWindow {
  int m_lo = 1;
  int m_hi = 0;
};

ScaleWindow usable_scales(const IfsSystem& ifs, const AttractorCloud& cloud,
                          std::uint64_t budget) {
  ScaleWindow w;
  const auto k = static_cast<std::uint64_t>(ifs.size());
  for (int m = 1;; ++m) {
    if (!checked_power(k, static_cast<unsigned>(m), budget)) break;
    if (c_scale(ifs, cloud, m) < 4.0 * cloud.resolution) break;
    if (m > 200) break;
    w.m_hi = m;
  }
  return w;
}

}  // namespace

RatioTrend ratio_trend(const IfsSystem& ifs, const AttractorCloud& cloud, const RateFunction& psi,
                       std::uint64_t budget) {
  const ScaleWindow w = usable_scales(ifs, cloud, budget);
  RatioTrend t;
  for (int m = w.m_lo; m <= w.m_hi; ++m) {
    const double c = c_scale(ifs, cloud, m);
    const double p = psi(3.0 * c);
    const auto n = cover_upper(cloud.points, c);
    t.m.push_back(m);
    t.ratio.push_back(std::isinf(p) ? 0.0 : m * static_cast<double>(n) / p);
    if (m == w.m_hi && c < 1.0) t.dimension = std::log(static_cast<double>(n)) / std::log(1.0 / c);
  }
  if (t.ratio.size() >= 3) {
    const std::size_t half = t.ratio.size() / 2;
    const double first_min = *std::min_element(t.ratio.begin(), t.ratio.begin() + half);
    const double second_max = *std::max_element(t.ratio.begin() + half, t.ratio.end());
    t.decreasing = second_max < first_min;
  }
  if (const auto* pw = std::get_if<PowerRate>(&psi.kind())) {
    t.closed_form_ok = pw->z > t.dimension;
  } else if (const auto* ie = std::get_if<IterExpRate>(&psi.kind())) {
    t.closed_form_ok = ie->n >= 2 || 1.0 > t.dimension;
  }
  return t;
}

Schedule build_schedule(const IfsSystem& ifs, const AttractorCloud& cloud, const RateFunction& psi,
                        const BaseMapChoice& base, const ScheduleOptions& options) {
  if (options.k_max < 1) throw ValidationError("k_max must be >= 1");
  const RatioTrend trend = ratio_trend(ifs, cloud, psi, options.budget);
  if (!trend.decreasing || !trend.closed_form_ok) {
    std::ostringstream os;
    os << "psi grows too slowly for this IFS: m N(C_m) / psi(3 C_m) over m = ";
    if (!trend.m.empty()) os << trend.m.front() << ".." << trend.m.back();
    os << " is";
    for (double r : trend.ratio) os << ' ' << format_real(r);
    os << "; dimension estimate " << format_real(trend.dimension);
    if (!trend.closed_form_ok) os << " (closed-form check failed)";
    throw ValidationError(os.str());
  }

  Schedule sched{psi, base, {}, cloud.diam_upper, ifs.lip_max(), false};
  const ScaleWindow w = usable_scales(ifs, cloud, options.budget);
  const PointSet outside = outside_ball(cloud.points, base.x_star, base.delta);

  std::map<int, std::uint64_t> n_low_cache, nd_low_cache;
  auto n_low = [&](int m) {
    auto [it, fresh] = n_low_cache.try_emplace(m, 0);
    if (fresh) it->second = packing_lower(cloud.points, sched.c_of(m));
    return it->second;
  };
  auto nd_low = [&](int m) {
    auto [it, fresh] = nd_low_cache.try_emplace(m, 0);
    if (fresh && !outside.empty()) it->second = packing_lower(outside, 3.0 * sched.c_of(m));
    return it->second;
  };
  constexpr double kMaxP = 9.0e18;

  std::uint64_t v = 0;
  int m_prev = 0;
  int m_first = 0;
  double claim_prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.k_max; ++k) {
    // k entries chosen so far; look for m_{k+1}.
    std::optional<ScheduleEntry> chosen;
    const int m_start = k == 0 ? w.m_lo : m_prev + k + 1;
    for (int m = m_start; m <= w.m_hi && !chosen; ++m) {
      const double c = sched.c_of(m);
      if (!(3.0 * c < base.delta / 2.0)) continue;
      if (k > 0 && !(n_low(m) > v)) continue;
      const std::uint64_t slack = static_cast<std::uint64_t>(k == 0 ? m : m_first) + 1;
      if (!(nd_low(m) > v + slack)) continue;
      const double ps = psi(3.0 * c);
      if (!(ps < kMaxP)) break;
      ScheduleEntry e;
      e.m = m;
      e.c = c;
      e.psi = ps;
      e.p = static_cast<std::uint64_t>(std::ceil(ps));
      e.sigma = build_sigma(ifs, cloud, c, m, options.budget);
      e.n_hat = e.sigma.size() / static_cast<std::uint64_t>(m);
      const double claim = (m + 1.0) * static_cast<double>(e.n_hat) / static_cast<double>(e.p);
      if (!(claim < claim_prev)) continue;
      if (k == 0 && options.first_ratio_target && claim > *options.first_ratio_target) continue;
      e.v = v + e.p + static_cast<std::uint64_t>(m) * e.n_hat;
      chosen = std::move(e);
    }
    if (!chosen || chosen->v > options.step_cap) {
      sched.truncated = true;
      break;
    }
    v = chosen->v;
    m_prev = chosen->m;
    if (k == 0) m_first = chosen->m;
    claim_prev = (chosen->m + 1.0) * static_cast<double>(chosen->n_hat) /
                 static_cast<double>(chosen->p);
    sched.entries.push_back(std::move(*chosen));
  }
  return sched;
}

namespace {

class SlowSource final : public SymbolSource {
 public:
  SlowSource(std::shared_ptr<const Schedule> sched, DriverStream tail)
      : sched_(std::move(sched)), tail_(std::move(tail)) {}
  SlowSource(const SlowSource& o)
      : sched_(o.sched_), tail_(o.tail_.clone()), k_(o.k_), pos_(o.pos_) {}

  int next() override {
    while (k_ < sched_->entries.size()) {
      const ScheduleEntry& e = sched_->entries[k_];
      const std::uint64_t len = e.p + e.sigma.size();
      if (pos_ < len) {
        const std::uint64_t at = pos_++;
        return at < e.p ? sched_->base.i_star : e.sigma.symbols[at - e.p];
      }
      ++k_;
      pos_ = 0;
    }
    return tail_.next();
  }
  std::unique_ptr<SymbolSource> clone() const override {
    return std::make_unique<SlowSource>(*this);
  }

 private:
  std::shared_ptr<const Schedule> sched_;
  DriverStream tail_;
  std::size_t k_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace

DriverStream slow_driver(const Schedule& schedule, DriverStream tail) {
  if (schedule.entries.empty()) throw ValidationError("slow driver needs a schedule entry");
  const int alphabet = schedule.entries.front().sigma.alphabet;
  if (tail.alphabet() != alphabet) throw ValidationError("tail driver alphabet mismatch");
  std::string id = "slow(psi=" + schedule.psi.to_string() +
                   ",k=" + std::to_string(schedule.entries.size()) + ")";
  return DriverStream(std::move(id), alphabet,
                      std::make_unique<SlowSource>(std::make_shared<const Schedule>(schedule),
                                                   std::move(tail)));
}

DriverStream slow_driver(const Schedule& schedule) {
  if (schedule.entries.empty()) throw ValidationError("slow driver needs a schedule entry");
  return slow_driver(schedule, champernowne(schedule.entries.front().sigma.alphabet));
}

}  // namespace chaosgame
