#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaosgame/cloud.hpp"
#include "chaosgame/geometry.hpp"
#include "chaosgame/ifs.hpp"
#include "chaosgame/rate.hpp"
#include "chaosgame/words.hpp"

namespace chaosgame {

/// Bracket lower <= N(eps) <= upper for the covering number of a point set
/// by closed eps-balls.
struct CoverEstimate {
  double eps = 0.0;
  std::uint64_t lower = 0;  // size of a maximal set with pairwise distances > 2 eps
  std::uint64_t upper = 0;  // size of a greedy cover
};

/// Greedy cover: the first uncovered point p (canonical order) places a ball
/// at p + eps e_1, which marks every point within eps of that center.
std::uint64_t cover_upper(const PointSet& points, double eps);

/// Greedy packing: keeps each point farther than 2 eps from all kept ones.
std::uint64_t packing_lower(const PointSet& points, double eps);

CoverEstimate covering_estimate(const PointSet& points, double eps);

inline constexpr std::uint64_t kDefaultOrbitCap = 100'000'000;

struct RecoveryRecord {
  double eps = 0.0;
  std::optional<std::uint64_t> n;  // nullopt: exceeded cap
  Point x0;
  std::string driver_id;
  double guard = 0.0;  // cloud resolution
  /// Recovery time of the cloud at radius eps - guard. Covering A at radius
  /// eps is then certified, so the exact value for A lies in [n, n_certified].
  std::optional<std::uint64_t> n_certified;
  std::uint64_t cap = 0;
};

/// First n with cloud within eps of {x_0, ..., x_n} along the orbit of
/// `driver` (a clone is consumed; the argument is untouched).
RecoveryRecord recovery_time(const IfsSystem& ifs, const DriverStream& driver,
                             std::span<const double> x0, double eps, const AttractorCloud& cloud,
                             std::uint64_t cap = kDefaultOrbitCap, bool certify = false);

/// Coverage check from scratch: is the cloud within eps of x_0..x_n?
bool orbit_covers(const PointSet& orbit_points, std::size_t n, const PointSet& cloud, double eps);

struct DimensionSample {
  double b = 0.0;
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  double rate_lower = 0.0;  // ln(lower) / ln(1/b)
  double rate_upper = 0.0;  // ln(upper) / ln(1/b)
};

struct DimensionEstimate {
  double value = 0.0;         // min of rate_upper over the window
  double liminf_proxy = 0.0;  // min of rate_lower over the window
  double bracket_width = 0.0;
  double a = 0.0, r = 0.0;
  int m_lo = 0, m_hi = 0;
  std::vector<DimensionSample> samples;
};

/// Lower box dimension estimate on scales b_m = a r^m, m_lo <= m <= m_hi,
/// keeping only scales with 2 * resolution < b_m < 1.
DimensionEstimate box_dimension(const AttractorCloud& cloud, double a, double r, int m_lo,
                                int m_hi);

/// ln(n) / ln(1/eps); nullopt for n = 0.
std::optional<double> log_rate(std::uint64_t n, double eps);

/// ln^{(order)}(n) / ln(1/eps), -inf when an intermediate logarithm leaves
/// the domain (argument <= 0 before the last step).
double iterated_log_rate(std::uint64_t n, double eps, int order);

/// n / psi(eps). Throws when psi(eps) saturates to infinity.
double rate_ratio(std::uint64_t n, const RateFunction& psi, double eps);

/// n + 1 >= cover.lower. A record that exceeded its cap passes.
bool key_inequality_check(const RecoveryRecord& record, const CoverEstimate& cover);

}  // namespace chaosgame
