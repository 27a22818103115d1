#include "chaosgame/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaosgame/errors.hpp"
#include "chaosgame/text.hpp"
#include "chaosgame/words.hpp"

namespace chaosgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp overflows a double above this argument.
const double kExpLimit = std::log(std::numeric_limits<double>::max());

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};

double table_value(const TableRate& t, double eps) {
  // Coordinates u = ln(1/eps), v = ln(psi); samples are sorted by u ascending.
  const double u = std::log(1.0 / eps);
  const auto& s = t.samples;
  auto u_at = [&](std::size_t i) { return std::log(1.0 / s[i].first); };
  auto v_at = [&](std::size_t i) { return std::log(s[i].second); };
  std::size_t hi = 1;
  while (hi + 1 < s.size() && u_at(hi) < u) ++hi;
  const std::size_t lo = hi - 1;
  const double slope = (v_at(hi) - v_at(lo)) / (u_at(hi) - u_at(lo));
  return std::exp(v_at(lo) + slope * (u - u_at(lo)));
}

}  // namespace

RateFunction::RateFunction(Kind kind) : kind_(std::move(kind)) { validate(); }

RateFunction RateFunction::bounding(int alphabet, double lip, double diam,
                                    double dist_to_attractor) {
  if (alphabet < 2) throw ValidationError("bounding rate needs K >= 2");
  if (!(lip > 0.0 && lip < 1.0)) throw ValidationError("bounding rate needs 0 < L < 1");
  const double q = std::log(static_cast<double>(alphabet)) / std::log(1.0 / lip);
  return RateFunction(
      BoundingRate{alphabet, de_bruijn_step(alphabet), diam + dist_to_attractor, q});
}

RateFunction RateFunction::table(std::vector<std::pair<double, double>> samples) {
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  return RateFunction(TableRate{std::move(samples)});
}

double RateFunction::operator()(double eps) const {
  if (!(eps > 0.0)) throw ValidationError("rate function needs eps > 0");
  return std::visit(
      Overloaded{
          [&](const PowerRate& r) { return std::pow(1.0 / eps, r.z); },
          [&](const IterExpRate& r) {
            double v = 1.0 / eps;
            for (int i = 1; i < r.n; ++i) {
              if (v > kExpLimit) return kInf;
              v = std::exp(v);
            }
            return v;
          },
          [&](const BoundingRate& r) {
            return r.alphabet * r.alpha * std::pow(r.base_distance / eps, r.exponent);
          },
          [&](const TableRate& r) { return table_value(r, eps); },
      },
      kind_);
}

void RateFunction::validate() const {
  std::visit(Overloaded{
                 [](const PowerRate& r) {
                   if (!(r.z > 0.0) || !std::isfinite(r.z)) {
                     throw ValidationError("power rate needs z > 0");
                   }
                 },
                 [](const IterExpRate& r) {
                   if (r.n < 1) throw ValidationError("iterexp rate needs n >= 1");
                 },
                 [](const BoundingRate& r) {
                   if (r.alphabet < 2 || r.alpha < 1 || !(r.base_distance > 0.0) ||
                       !(r.exponent > 0.0) || !std::isfinite(r.exponent)) {
                     throw ValidationError("bounding rate needs K >= 2, alpha >= 1, D > 0, q > 0");
                   }
                 },
                 [](const TableRate& r) {
                   if (r.samples.size() < 2) throw ValidationError("rate table needs >= 2 samples");
                   for (std::size_t i = 0; i < r.samples.size(); ++i) {
                     const auto [eps, v] = r.samples[i];
                     if (!(eps > 0.0) || !(v > 0.0) || !std::isfinite(eps) || !std::isfinite(v)) {
                       throw ValidationError("rate table entries must be positive and finite");
                     }
                     if (i > 0 && !(eps < r.samples[i - 1].first && v > r.samples[i - 1].second)) {
                       throw ValidationError("rate table must increase strictly as eps decreases");
                     }
                   }
                 },
             },
             kind_);
  // psi must grow without bound as eps -> 0.
  double prev = (*this)(0.5);
  for (int j = 2; j <= 12; ++j) {
    const double v = (*this)(std::pow(10.0, -j));
    if (v < prev) throw ValidationError("rate function decreases as eps -> 0");
    prev = v;
  }
  if (!(prev > (*this)(0.5))) throw ValidationError("rate function does not grow as eps -> 0");
}

RateFunction RateFunction::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("rate function must look like kind:params, got '" + std::string(text) +
                          "'");
  }
  const std::string_view kind = trim(text.substr(0, colon));
  const std::string_view args = text.substr(colon + 1);
  if (kind == "power") return power(parse_real(args));
  if (kind == "iterexp") return iterexp(static_cast<int>(parse_integer(args)));
  if (kind == "bounding") {
    const auto parts = split(args, ',');
    if (parts.size() != 4) throw ValidationError("bounding rate needs K,ALPHA,D,Q");
    return RateFunction(BoundingRate{static_cast<int>(parse_integer(parts[0])),
                                     static_cast<int>(parse_integer(parts[1])),
                                     parse_real(parts[2]), parse_real(parts[3])});
  }
  if (kind == "table") {
    std::vector<std::pair<double, double>> samples;
    for (auto item : split(args, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ValidationError("rate table entries look like EPS=VALUE");
      samples.emplace_back(parse_real(item.substr(0, eq)), parse_real(item.substr(eq + 1)));
    }
    return table(std::move(samples));
  }
  throw ValidationError("unknown rate function kind '" + std::string(kind) + "'");
}

std::string RateFunction::to_string() const {
  return std::visit(
      Overloaded{
          [](const PowerRate& r) { return "power:" + format_real(r.z); },
          [](const IterExpRate& r) { return "iterexp:" + std::to_string(r.n); },
          [](const BoundingRate& r) {
            return "bounding:" + std::to_string(r.alphabet) + "," + std::to_string(r.alpha) + "," +
                   format_real(r.base_distance) + "," + format_real(r.exponent);
          },
          [](const TableRate& r) {
            std::string out = "table:";
            for (std::size_t i = 0; i < r.samples.size(); ++i) {
              if (i) out += ",";
              out += format_real(r.samples[i].first) + "=" + format_real(r.samples[i].second);
            }
            return out;
          },
      },
      kind_);
}

}  // namespace chaosgame
