#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chaosgame/errors.hpp"
#include "chaosgame/harness.hpp"
#include "chaosgame/metrics.hpp"

using namespace chaosgame;

namespace {

// Brute-force coverage: is every cloud point within eps of x_0..x_n?
bool brute_covers(const PointSet& orbit, std::size_t n, const PointSet& cloud, double eps) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool hit = false;
    for (std::size_t k = 0; k <= n && !hit; ++k) hit = distance(orbit[k], cloud[i]) <= eps;
    if (!hit) return false;
  }
  return true;
}

// Exact covering number of a finite subset of the line by closed eps-balls:
// greedy from the left is optimal in one dimension.
std::uint64_t line_cover_number(std::vector<double> xs, double eps) {
  std::sort(xs.begin(), xs.end());
  std::uint64_t n = 0;
  double reach = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (x <= reach) continue;
    ++n;
    reach = x + 2.0 * eps;
  }
  return n;
}

const AttractorCloud& cantor_cloud() {
  static const AttractorCloud c = build_cloud(named_ifs("cantor"), 1e-5);
  return c;
}

}  // namespace

TEST_CASE("cover estimates on the Cantor cloud") {
  const auto& c = cantor_cloud();
  const auto half = covering_estimate(c.points, 0.5);
  CHECK(half.lower == 1);
  CHECK(half.upper == 1);
  const auto sixth = covering_estimate(c.points, 1.0 / 6.0);
  CHECK(sixth.lower == 2);
  CHECK(sixth.upper == 2);

  std::uint64_t prev = 0;
  for (double eps = 0.9; eps > 1e-4; eps /= 1.3) {
    const auto est = covering_estimate(c.points, eps);
    const auto exact = line_cover_number(c.points.coords(), eps);
    CHECK(1 <= est.lower);
    CHECK(est.lower <= exact);
    CHECK(exact <= est.upper);
    CHECK(est.upper >= prev);
    prev = est.upper;
  }
}

TEST_CASE("cover estimates bracket a brute-force cover in the plane") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet ps(2);
  for (int i = 0; i < 400; ++i) ps.push_back(Point{u(rng), u(rng)});
  for (double eps : {0.05, 0.1, 0.3}) {
    const auto est = covering_estimate(ps, eps);
    CHECK(est.lower <= est.upper);
    // The greedy centres really do cover.
    std::vector<Point> centers;
    std::vector<bool> covered(ps.size(), false);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (covered[i]) continue;
      Point c = ps.point(i);
      c[0] += eps;
      centers.push_back(c);
      for (std::size_t j = 0; j < ps.size(); ++j)
        if (distance(ps[j], c) <= eps) covered[j] = true;
    }
    CHECK(centers.size() == est.upper);
    // Packing points are pairwise farther than 2 eps.
    std::vector<Point> kept;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      bool far = true;
      for (const auto& k : kept) far = far && distance(k, ps[i]) > 2.0 * eps;
      if (far) kept.push_back(ps.point(i));
    }
    CHECK(kept.size() == est.lower);
  }
}

TEST_CASE("recovery on trivial and example4 systems") {
  const IfsSystem single = named_ifs("single");
  const auto sc = build_cloud(single, 1e-3);
  for (double eps : {0.5, 0.01, 1e-3 * 2})
    CHECK(*recovery_time(single, champernowne(2), Point{0.0}, eps, sc).n == 0);

  const auto cfg = preset("example4-z1");
  const IfsSystem e4 = make_ifs(cfg.ifs);
  const auto cloud = make_cloud(cfg, e4);
  const auto drv = example4_driver(1.0);
  CHECK(*recovery_time(e4, drv, Point{1.0}, 0.125, cloud).n == 26);
  CHECK(*recovery_time(e4, drv, Point{0.0}, 0.125, cloud).n == 9);
  CHECK(drv.position() == 0);
}

TEST_CASE("recovery soundness against brute force") {
  const auto& c = cantor_cloud();
  const IfsSystem cantor = named_ifs("cantor");
  const IfsSystem sier = named_ifs("sierpinski");
  const auto sc = build_cloud(sier, 0.01);
  struct Case {
    const IfsSystem* ifs;
    const AttractorCloud* cloud;
    DriverStream (*make)();
    Point x0;
    double eps;
  };
  std::vector<Case> cases = {
      {&cantor, &c, [] { return champernowne(2); }, {0.0}, 1.0 / 27.0},
      {&cantor, &c, [] { return champernowne(2); }, {5.0}, 0.01},
      {&cantor, &c, [] { return infinite_de_bruijn(2); }, {1.0}, 0.02},
      {&cantor, &c, [] { return random_driver(2, 4); }, {0.3}, 0.05},
      {&sier, &sc, [] { return infinite_de_bruijn(3); }, {0.2, 0.9}, 0.1},
      {&sier, &sc, [] { return champernowne(3); }, {0.0, 0.0}, 0.06},
  };
  for (const auto& cs : cases) {
    const auto rec = recovery_time(*cs.ifs, cs.make(), cs.x0, cs.eps, *cs.cloud, 1'000'000, true);
    REQUIRE(rec.n);
    REQUIRE(rec.n_certified);
    CHECK(*rec.n <= *rec.n_certified);
    auto d = cs.make();
    const Orbit o = run_orbit(*cs.ifs, d, cs.x0, *rec.n_certified);
    CHECK(brute_covers(o.points, *rec.n, cs.cloud->points, cs.eps));
    if (*rec.n > 0) CHECK_FALSE(brute_covers(o.points, *rec.n - 1, cs.cloud->points, cs.eps));
    CHECK(orbit_covers(o.points, *rec.n, cs.cloud->points, cs.eps));
    const double inner = cs.eps - cs.cloud->resolution;
    CHECK(brute_covers(o.points, *rec.n_certified, cs.cloud->points, inner));
    if (*rec.n_certified > 0)
      CHECK_FALSE(brute_covers(o.points, *rec.n_certified - 1, cs.cloud->points, inner));
  }
}

TEST_CASE("recovery caps and preconditions") {
  const IfsSystem cantor = named_ifs("cantor");
  const auto& c = cantor_cloud();
  const auto rec = recovery_time(cantor, literal_driver(Word{std::vector<int>(50, 1), 2}), Point{0.0},
                                 0.01, c, 40);
  CHECK_FALSE(rec.n);
  CHECK(rec.cap == 40);
  CHECK_THROWS_AS(recovery_time(cantor, champernowne(2), Point{0.0}, c.resolution, c), ValidationError);
  CHECK_THROWS_AS(recovery_time(cantor, champernowne(2), Point{0.0, 1.0}, 0.1, c), ValidationError);
}

TEST_CASE("box dimension") {
  const auto one = AttractorCloud::from_points(PointSet(1, {0.25}), 0.0);
  CHECK(box_dimension(one, 0.5, 0.5, 1, 10).value == 0.0);

  const auto cantor = build_cloud(named_ifs("cantor"), 1e-6);
  const auto est = box_dimension(cantor, 0.51, 1.0 / 3.0, 6, 10);
  // Balls of radius 0.51 * 3^-m cover each level-m interval once and never two at a time.
  REQUIRE(est.samples.size() == 5);
  for (int m = 6; m <= 10; ++m) {
    const auto& s = est.samples[static_cast<std::size_t>(m - 6)];
    CHECK(s.lower == (1u << m));
    CHECK(s.upper == (1u << m));
  }
  CHECK(est.value == doctest::Approx(6.0 * std::log(2.0) / (6.0 * std::log(3.0) - std::log(0.51))));
  CHECK(est.liminf_proxy <= est.value);
  CHECK(est.bracket_width == doctest::Approx(est.value - est.liminf_proxy));
  for (const auto& s : est.samples) {
    CHECK(s.lower <= s.upper);
    CHECK(s.b > 2.0 * cantor.resolution);
  }

  const auto cfg = preset("segment-dimension");
  const auto seg = make_cloud(cfg, make_ifs(cfg.ifs));
  const auto se = box_dimension(seg, cfg.dimension.a, cfg.dimension.r, cfg.dimension.m_lo,
                                cfg.dimension.m_hi);
  CHECK(std::abs(se.value - 1.0) <= 0.05);
  for (const auto& s : se.samples) CHECK(s.upper == line_cover_number(seg.points.coords(), s.b));

  CHECK_THROWS_AS(box_dimension(cantor, 0.5, 1.0 / 3.0, 30, 31), ValidationError);
  CHECK_THROWS_AS(box_dimension(cantor, 0.5, 1.5, 1, 3), ValidationError);
}

TEST_CASE("rate diagnostics") {
  CHECK(*log_rate(8, 0.5) == doctest::Approx(3.0));
  CHECK(*log_rate(1, 0.3) == 0.0);
  CHECK_FALSE(log_rate(0, 0.3));

  CHECK(iterated_log_rate(1619, std::exp(-1.0), 2) == doctest::Approx(2.0).epsilon(0.005));
  CHECK(iterated_log_rate(2, 0.1, 3) == -std::numeric_limits<double>::infinity());
  for (std::uint64_t n : {1u, 7u, 1000u}) CHECK(iterated_log_rate(n, 0.01, 1) == doctest::Approx(*log_rate(n, 0.01)));

  const auto p1 = RateFunction::power(1.0);
  const double r = rate_ratio(static_cast<std::uint64_t>(std::ceil(p1(1e-3))), p1, 1e-3);
  CHECK(r >= 1.0);
  CHECK(r <= 1.001);
  CHECK(rate_ratio(1'000'000, RateFunction::iterexp(2), 1.0 / std::log(1e6)) == doctest::Approx(1.0));
  CHECK(rate_ratio(50, RateFunction::power(2.0), 0.1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(rate_ratio(5, RateFunction::iterexp(3), 1e-3), CapExceeded);
}

TEST_CASE("key inequality check") {
  RecoveryRecord rec;
  rec.eps = 0.1;
  rec.n = 0;
  CHECK(key_inequality_check(rec, CoverEstimate{0.1, 1, 1}));
  CHECK_FALSE(key_inequality_check(rec, CoverEstimate{0.1, 2, 2}));
  rec.n.reset();
  CHECK(key_inequality_check(rec, CoverEstimate{0.1, 5, 5}));
  CHECK_THROWS_AS(key_inequality_check(rec, CoverEstimate{0.2, 1, 1}), ValidationError);

  const IfsSystem cantor = named_ifs("cantor");
  const auto& c = cantor_cloud();
  const double eps = std::pow(3.0, -6);
  const auto cover = covering_estimate(c.points, eps);
  for (double x0 = -1.0; x0 <= 2.0; x0 += 0.25) {
    const auto rec2 = recovery_time(cantor, champernowne(2), Point{x0}, eps, c);
    CHECK(key_inequality_check(rec2, cover));
  }
}

TEST_CASE("champernowne fast rate on the Cantor set") {
  const auto cfg = preset("cantor-champernowne");
  const IfsSystem ifs = make_ifs(cfg.ifs);
  const auto cloud = make_cloud(cfg, ifs);
  const double bound = std::log(2.0) / std::log(3.0) + 0.1;
  for (double x0 : {0.0, 1.0, 5.0}) {
    for (int m = 8; m <= 12; ++m) {
      const double eps = std::pow(3.0, -m);
      const auto rec = recovery_time(ifs, champernowne(2), Point{x0}, eps, cloud);
      REQUIRE(rec.n);
      INFO("x0 = " << x0 << ", m = " << m << ", n = " << *rec.n);
      CHECK(*log_rate(*rec.n, eps) <= bound);
    }
  }
}

TEST_CASE("c_m chain for Champernowne and de Bruijn drivers") {
  struct Setup {
    const char* ifs;
    double res;
    int k;
    int m_max;
    int m_step;
  };
  for (const auto& s : {Setup{"cantor", 1e-6, 2, 10, 1}, Setup{"sierpinski", 2e-3, 3, 6, 1}}) {
    const IfsSystem ifs = named_ifs(s.ifs);
    const auto cloud = build_cloud(ifs, s.res);
    KdTree tree(cloud.points);
    std::vector<Point> starts = ifs.dim() == 1 ? std::vector<Point>{{0.0}, {1.0}, {5.0}}
                                               : std::vector<Point>{{0.0, 0.0}, {1.0, 1.0}};
    for (const auto& x0 : starts) {
      const double dist = tree.nearest(x0).distance + cloud.resolution;
      for (auto make : {+[](int k) { return champernowne(k); }, +[](int k) { return infinite_de_bruijn(k); }}) {
        for (int m = 1; m <= s.m_max; m += s.m_step) {
          const double cm = std::pow(ifs.lip_max(), m) * (cloud.diam_upper + dist);
          const auto drv = make(s.k);
          const auto rec = recovery_time(ifs, drv, x0, cm + cloud.resolution, cloud);
          auto scan = drv.clone();
          const auto nim = word_coverage(scan, m);
          REQUIRE(rec.n);
          REQUIRE(nim.n);
          CHECK(*rec.n <= *nim.n);
        }
      }
    }
  }
}

TEST_CASE("de Bruijn rate bound") {
  for (int k : {2, 3}) {
    const IfsSystem ifs = k == 2 ? named_ifs("cantor") : named_ifs("sierpinski");
    const auto cloud = build_cloud(ifs, k == 2 ? 1e-6 : 2e-3);
    KdTree tree(cloud.points);
    const Point x0 = k == 2 ? Point{0.5} : Point{0.5, 0.2};
    const double dist = tree.nearest(x0).distance + cloud.resolution;
    const double c = de_bruijn_step(k) + 0.5;
    for (int m = de_bruijn_step(k); m <= (k == 2 ? 12 : 6); m += de_bruijn_step(k)) {
      const double cm = std::pow(ifs.lip_max(), m) * (cloud.diam_upper + dist);
      const auto rec = recovery_time(ifs, infinite_de_bruijn(k), x0, cm + cloud.resolution, cloud);
      REQUIRE(rec.n);
      CHECK(static_cast<double>(*rec.n) <= c * std::pow(k, m));
    }
  }
}

TEST_CASE("example4 log-rate trend") {
  const auto cfg = preset("example4-z1");
  const IfsSystem ifs = make_ifs(cfg.ifs);
  const auto cloud = make_cloud(cfg, ifs);
  const auto drv = example4_driver(1.0);
  const double z = 1.0;
  for (int k = 3; k <= 12; ++k) {
    const double eps = std::ldexp(1.0, -k);
    double sup = 0.0;
    for (double x0 : {0.0, 1.0, 0.5, 0.75}) {
      const auto rec = recovery_time(ifs, drv, Point{x0}, eps, cloud);
      sup = std::max(sup, std::abs(*log_rate(*rec.n, eps) - z));
    }
    CHECK(sup <= std::log(k + 1.0) / (k * std::log(2.0)) + 2.0 / k * z + 0.02);
  }
}

TEST_CASE("example4 separation at geometric midpoints") {
  for (const char* name : {"example4-z1", "example4-z05"}) {
    const auto cfg = preset(name);
    const IfsSystem ifs = make_ifs(cfg.ifs);
    const auto cloud = make_cloud(cfg, ifs);
    const double z = *cfg.driver.z;
    const auto drv = example4_driver(z);
    const auto psi = RateFunction::power(z);
    double prev = 0.0;
    for (int k = cfg.sweep.m_lo; k <= cfg.sweep.m_hi; ++k) {
      const double mid = std::ldexp(1.0, -k) / std::sqrt(2.0);
      double inf = std::numeric_limits<double>::infinity();
      for (double x0 : {0.0, 1.0}) {
        const auto rec = recovery_time(ifs, drv, Point{x0}, mid, cloud);
        inf = std::min(inf, rate_ratio(*rec.n, psi, mid));
      }
      INFO(std::string(name) << " k = " << k << " inf ratio = " << inf);
      CHECK(inf > prev);
      if (k == 12) CHECK(inf > 10.0);
      prev = inf;
    }
  }
}
