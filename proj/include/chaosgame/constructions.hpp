#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "chaosgame/cloud.hpp"
#include "chaosgame/ifs.hpp"
#include "chaosgame/rate.hpp"
#include "chaosgame/words.hpp"

namespace chaosgame {

inline constexpr int kMinOutsideThreshold = 8;

struct BaseMapChoice {
  int i_star = 0;
  Point x_star;
  double delta = 0.0;
  std::uint64_t outside_count = 0;  // cloud points outside B(x_star, delta)
};

/// First map index whose fixed point x leaves at least `threshold` cloud
/// points outside B(x, diam_lower / 4), two of them closer than
/// 2 * resolution (a finite witness of an accumulation point away from x).
BaseMapChoice choose_base_map(const IfsSystem& ifs, const AttractorCloud& cloud,
                              int threshold = kMinOutsideThreshold);

/// C_m = L^m (diam_upper + 1).
double c_scale(const IfsSystem& ifs, const AttractorCloud& cloud, int m);

/// Points f_{a_1} o ... o f_{a_m}(x_s) for all K^m address words, indexed by
/// the base-K code of (a_1 - 1, ..., a_m - 1) with a_1 most significant.
PointSet addressed_points(const IfsSystem& ifs, int m,
                          std::uint64_t budget = kDefaultPointBudget);

/// Greedy cover of the cloud by depth-m addressed points: the first
/// uncovered cloud point p picks, among addressed points within d of p, the
/// one with the largest first coordinate, and every cloud point within d of
/// it is covered. Returns the concatenated reversed address words, so
/// |sigma| = m * (number of centers).
Word build_sigma(const IfsSystem& ifs, const AttractorCloud& cloud, double d, int m,
                 std::uint64_t budget = kDefaultPointBudget);

struct ScheduleEntry {
  int m = 0;
  std::uint64_t p = 0;
  Word sigma;
  std::uint64_t n_hat = 0;  // |sigma| / m
  std::uint64_t v = 0;      // cumulative block length through this entry
  double c = 0.0;           // C_m
  double psi = 0.0;         // psi(3 C_m)
};

struct Schedule {
  RateFunction psi;
  BaseMapChoice base;
  std::vector<ScheduleEntry> entries;
  double diam_upper = 0.0;
  double lip = 0.0;
  bool truncated = false;  // stopped before k_max entries

  double c_of(int m) const { return std::pow(lip, m) * (diam_upper + 1.0); }
  /// v(k) with v(0) = 0; k is 1-based.
  std::uint64_t v_before(std::size_t k) const { return k <= 1 ? 0 : entries[k - 2].v; }
};

struct ScheduleOptions {
  int k_max = 3;
  std::uint64_t step_cap = 5'000'000;
  /// Upper limit on (m_1 + 1) N / p_1 for the first entry; unset means any.
  std::optional<double> first_ratio_target;
  std::uint64_t budget = kDefaultPointBudget;
};

/// Greedy choice of m_1 < m_2 < ... from the cloud. Every entry satisfies
///   C_{m_1} < delta / 2 and 3 C_{m_k} < delta / 2,
///   m_{k+1} > m_k + k,
///   N_low(C_{m_{k+1}}) > v(k),
///   N_delta_low(3 C_{m_{k+1}}) > v(k) + m_1 + 1 (and > m_1 + 1 for k = 0),
///   (m_k + 1) n_hat_k / p_k strictly decreasing,
///   p_k = ceil(psi(3 C_{m_k})),
/// where N_low is the packing bound on the cloud and N_delta_low the packing
/// bound on the cloud outside B(x_star, delta). Scales are limited to
/// C_m >= 4 * resolution.
Schedule build_schedule(const IfsSystem& ifs, const AttractorCloud& cloud, const RateFunction& psi,
                        const BaseMapChoice& base, const ScheduleOptions& options = {});

/// m N(C_m) / psi(3 C_m) over the usable window, used for the trend test.
struct RatioTrend {
  std::vector<int> m;
  std::vector<double> ratio;
  bool decreasing = false;
  bool closed_form_ok = true;
  double dimension = 0.0;
};
RatioTrend ratio_trend(const IfsSystem& ifs, const AttractorCloud& cloud, const RateFunction& psi,
                       std::uint64_t budget = kDefaultPointBudget);

/// Blocks (i_star)^{p_k} sigma_k for every entry, then `tail`.
DriverStream slow_driver(const Schedule& schedule, DriverStream tail);
DriverStream slow_driver(const Schedule& schedule);

}  // namespace chaosgame
