#include <doctest.h>

#include <cmath>

#include "chaosgame/errors.hpp"
#include "chaosgame/rate.hpp"
#include "chaosgame/text.hpp"

using namespace chaosgame;

TEST_CASE("power and iterated exponential rates") {
  const auto p = RateFunction::power(1.0);
  CHECK(p(0.1) == doctest::Approx(10.0));
  CHECK(RateFunction::power(2.0)(0.1) == doctest::Approx(100.0));
  CHECK(RateFunction::power(0.5)(0.01) == doctest::Approx(10.0));

  CHECK(RateFunction::iterexp(1)(0.25) == doctest::Approx(4.0));
  CHECK(RateFunction::iterexp(2)(0.5) == doctest::Approx(std::exp(2.0)));
  CHECK(RateFunction::iterexp(3)(1.0) == doctest::Approx(std::exp(std::exp(1.0))));
  CHECK(std::isinf(RateFunction::iterexp(3)(0.01)));
  CHECK(std::isinf(RateFunction::iterexp(2)(1e-3)));
}

TEST_CASE("bounding rate hits K^m alpha at c_{m-1}") {
  for (int k : {2, 3, 4}) {
    for (double lip : {1.0 / 3.0, 0.5, 0.2}) {
      const double diam = 1.3, dist = 0.4;
      const auto psi = RateFunction::bounding(k, lip, diam, dist);
      const auto& b = std::get<BoundingRate>(psi.kind());
      CHECK(b.alpha == (k == 2 ? 2 : 1));
      CHECK(b.exponent == doctest::Approx(std::log(k) / std::log(1.0 / lip)));
      for (int m = 1; m <= 8; ++m) {
        const double c = std::pow(lip, m - 1) * (diam + dist);
        CHECK(psi(c) == doctest::Approx(std::pow(k, m) * b.alpha).epsilon(1e-9));
      }
    }
  }
  CHECK_THROWS_AS(RateFunction::bounding(1, 0.5, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::bounding(2, 1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("table rates interpolate in log-log space") {
  const auto t = RateFunction::table({{1e-4, 1e4}, {0.1, 10.0}, {1e-2, 1e2}});
  CHECK(t(0.1) == doctest::Approx(10.0));
  CHECK(t(1e-3) == doctest::Approx(1e3));
  CHECK(t(1e-6) == doctest::Approx(1e6));
  CHECK(t(0.5) == doctest::Approx(2.0));

  const auto ln = RateFunction::table({{0.5, std::log(2.0)}, {1e-3, std::log(1e3)}, {1e-12, std::log(1e12)}});
  CHECK(ln(1e-3) == doctest::Approx(std::log(1e3)));
}

TEST_CASE("rate validation") {
  CHECK_THROWS_AS(RateFunction::power(0.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::power(-1.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::iterexp(0), ValidationError);
  CHECK_THROWS_AS(RateFunction::table({{0.1, 5.0}}), ValidationError);
  CHECK_THROWS_AS(RateFunction::table({{0.1, 5.0}, {0.01, 4.0}}), ValidationError);
  CHECK_THROWS_AS(RateFunction::table({{0.1, 5.0}, {0.01, -4.0}}), ValidationError);
  CHECK_THROWS_AS(RateFunction::power(1.0)(0.0), ValidationError);
  // Every accepted rate grows as eps -> 0.
  for (const auto& psi : {RateFunction::power(0.3), RateFunction::iterexp(2),
                          RateFunction::bounding(3, 0.5, 1.0, 0.0),
                          RateFunction::table({{0.5, 1.0}, {0.01, 1.5}})}) {
    double prev = 0.0;
    for (double eps = 0.5; eps > 1e-12; eps /= 10.0) {
      const double v = psi(eps);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(prev > psi(0.5));
  }
}

TEST_CASE("rate text round trip") {
  for (const char* text : {"power:1", "power:0.5", "iterexp:2", "bounding:2,2,1.5,0.63",
                           "table:0.1=10,0.01=100"}) {
    const auto psi = RateFunction::parse(text);
    CHECK(RateFunction::parse(psi.to_string()) == psi);
  }
  CHECK(RateFunction::parse(" power : 1/2 ") == RateFunction::power(0.5));
  CHECK_THROWS_AS(RateFunction::parse("power"), ValidationError);
  CHECK_THROWS_AS(RateFunction::parse("exp:2"), ValidationError);
  CHECK_THROWS_AS(RateFunction::parse("bounding:2,2"), ValidationError);
  CHECK_THROWS_AS(RateFunction::parse("table:0.1"), ValidationError);
}

TEST_CASE("text helpers") {
  CHECK(parse_real("1/3") == 1.0 / 3.0);
  CHECK(parse_real(" 2.5e-3 ") == 2.5e-3);
  CHECK(std::isinf(parse_real("inf")));
  CHECK_THROWS_AS(parse_real("abc"), ValidationError);
  CHECK_THROWS_AS(parse_real("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_real("1.5x"), ValidationError);
  CHECK(parse_unsigned("42") == 42);
  CHECK_THROWS_AS(parse_unsigned("-1"), ValidationError);
  CHECK(parse_integer("-7") == -7);
  CHECK(parse_real_list("1 2\t3") == std::vector<double>{1, 2, 3});
  CHECK(trim("  a b ") == "a b");
  CHECK(split("a, b,,c", ',') == std::vector<std::string_view>{"a", "b", "", "c"});
  CHECK(split("", ',').empty());
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5})
    CHECK(parse_real(format_real(v)) == v);
}
