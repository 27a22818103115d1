#include "chaosgame/ifs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "chaosgame/errors.hpp"

namespace chaosgame {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double operator_norm(std::size_t dim, const std::vector<double>& matrix) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::Map<const RowMatrix> m(matrix.data(), d, d);
  if (m.isZero(0.0)) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

AffineMap::AffineMap(std::size_t dim, std::vector<double> matrix, std::vector<double> offset)
    : dim_(dim), matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (dim_ == 0 || dim_ > kMaxDim) throw ValidationError("unsupported dimension " + std::to_string(dim_));
  if (matrix_.size() != dim_ * dim_) throw ValidationError("matrix must have d*d entries");
  if (offset_.size() != dim_) throw ValidationError("offset must have d entries");
  for (double v : matrix_) {
    if (!std::isfinite(v)) throw ValidationError("non-finite matrix entry");
  }
  for (double v : offset_) {
    if (!std::isfinite(v)) throw ValidationError("non-finite offset entry");
  }
  lip_ = operator_norm(dim_, matrix_);
}

AffineMap AffineMap::scaling(double scale, std::vector<double> offset) {
  const std::size_t d = offset.size();
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = scale;
  return AffineMap(d, std::move(m), std::move(offset));
}

Point AffineMap::operator()(std::span<const double> x) const {
  Point out(dim_);
  apply(x, out);
  return out;
}

IfsSystem::IfsSystem(std::vector<AffineMap> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) throw ValidationError("IFS needs at least one map");
  dim_ = maps_.front().dim();
  lip_max_ = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    if (maps_[i].dim() != dim_) throw ValidationError("maps disagree on dimension");
    if (!(maps_[i].lip() < 1.0)) {
      throw ValidationError("map " + std::to_string(i + 1) + " is not a contraction (lip = " +
                            std::to_string(maps_[i].lip()) + ")");
    }
    lip_max_ = std::max(lip_max_, maps_[i].lip());
  }
  if (!(lip_max_ > 0.0)) throw ValidationError("degenerate IFS: every map is constant");
}

Point fixed_point(const AffineMap& map) {
  const std::size_t dim = map.dim();
  const auto d = static_cast<Eigen::Index>(dim);
  auto residual_ok = [&](const Point& x) {
    const Point fx = map(x);
    return distance(fx, x) <= 1e-10 * (1.0 + norm(x));
  };

  Eigen::Map<const RowMatrix> m(map.matrix().data(), d, d);
  Eigen::Map<const Eigen::VectorXd> b(map.offset().data(), d);
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) - m;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (lu.isInvertible()) {
    const Eigen::VectorXd sol = lu.solve(b);
    Point x(sol.data(), sol.data() + d);
    if (residual_ok(x)) return x;
  }

  Point x(dim, 0.0), next(dim);
  for (int it = 0; it < 1'000'000; ++it) {
    map.apply(x, next);
    std::swap(x, next);
    if (residual_ok(x)) return x;
  }
  throw ValidationError("no contraction: fixed-point iteration did not converge");
}

Orbit run_orbit(const IfsSystem& ifs, DriverStream& driver, std::span<const double> x0,
                std::size_t n) {
  if (x0.size() != ifs.dim()) throw ValidationError("starting point has the wrong dimension");
  Orbit orbit{Point(x0.begin(), x0.end()), PointSet(ifs.dim()), Word{{}, ifs.size()}};
  orbit.points.reserve(n + 1);
  orbit.driver_prefix.symbols.reserve(n);
  orbit.points.push_back(x0);
  Point cur(x0.begin(), x0.end()), next(ifs.dim());
  for (std::size_t k = 1; k <= n; ++k) {
    const int s = driver.next();
    if (s < 1 || s > ifs.size()) throw ValidationError("invalid symbol " + std::to_string(s));
    ifs.map(s).apply(cur, next);
    std::swap(cur, next);
    orbit.points.push_back(cur);
    orbit.driver_prefix.symbols.push_back(s);
  }
  return orbit;
}

IfsSystem named_ifs(std::string_view name) {
  if (name == "cantor") {
    return IfsSystem({AffineMap::scaling(1.0 / 3.0, {0.0}), AffineMap::scaling(1.0 / 3.0, {2.0 / 3.0})});
  }
  if (name == "segment") {
    return IfsSystem({AffineMap::scaling(0.5, {0.0}), AffineMap::scaling(0.5, {0.5})});
  }
  if (name == "example4") {
    return IfsSystem({AffineMap::scaling(0.5, {0.0}), AffineMap::scaling(0.0, {1.0})});
  }
  if (name == "sierpinski") {
    const double h = std::sqrt(3.0) / 2.0;
    return IfsSystem({AffineMap::scaling(0.5, {0.0, 0.0}), AffineMap::scaling(0.5, {0.5, 0.0}),
                      AffineMap::scaling(0.5, {0.25, h / 2.0})});
  }
  if (name == "single") return IfsSystem({AffineMap::scaling(0.5, {0.0})});
  if (name == "collapse") {
    return IfsSystem({AffineMap::scaling(0.5, {0.0}), AffineMap::scaling(1.0 / 3.0, {0.0})});
  }
  throw ValidationError("unknown IFS name '" + std::string(name) + "'");
}

}  // namespace chaosgame
