#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpbr {

using Point = std::vector<double>;

/// Uniform tensor-product grid on [lo, hi]^d, endpoints included,
/// flattened row-major with the last coordinate varying fastest.
class Grid {
 public:
  Grid() = default;

  static Grid uniform(double lo, double hi, int points_per_dim, int dim = 1) {
    if (points_per_dim < 2) throw std::invalid_argument("grid needs >= 2 points per dimension");
    if (!(hi > lo)) throw std::invalid_argument("grid needs hi > lo");
    if (dim < 1 || dim > 4) throw std::invalid_argument("grid dimension must be in [1, 4]");
    Grid g;
    g.lo_ = lo;
    g.hi_ = hi;
    g.per_dim_ = points_per_dim;
    g.dim_ = dim;
    std::size_t total = 1;
    for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(points_per_dim);
    auto pts = std::make_shared<std::vector<Point>>();
    pts->reserve(total);
    const double step = (hi - lo) / (points_per_dim - 1);
    std::vector<int> digit(dim, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Point p(dim);
      for (int j = 0; j < dim; ++j) p[j] = lo + digit[j] * step;
      pts->push_back(std::move(p));
      for (int j = dim - 1; j >= 0; --j) {
        if (++digit[j] < points_per_dim) break;
        digit[j] = 0;
      }
    }
    g.points_ = std::move(pts);
    return g;
  }

  int dim() const { return dim_; }
  int points_per_dim() const { return per_dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return points_ ? points_->size() : 0; }
  bool empty() const { return size() == 0; }
  const Point& point(std::size_t i) const { return (*points_)[i]; }
  const std::vector<Point>& points() const {
    static const std::vector<Point> none;
    return points_ ? *points_ : none;
  }
  double step() const { return (hi_ - lo_) / (per_dim_ - 1); }

  /// Uniform cell weight (hi-lo)^d / size, used as Nystrom quadrature weight.
  double cell_weight() const {
    double w = 1.0;
    for (int j = 0; j < dim_; ++j) w *= (hi_ - lo_) / per_dim_;
    return w;
  }

  /// Tensor-product trapezoid weights for Lebesgue integrals on the grid.
  Eigen::VectorXd trapezoid_weights() const {
    Eigen::VectorXd one_dim(per_dim_);
    one_dim.setConstant(step());
    one_dim(0) *= 0.5;
    one_dim(per_dim_ - 1) *= 0.5;
    Eigen::VectorXd w(size());
    std::vector<int> digit(dim_, 0);
    for (std::size_t idx = 0; idx < size(); ++idx) {
      double v = 1.0;
      for (int j = 0; j < dim_; ++j) v *= one_dim(digit[j]);
      w(idx) = v;
      for (int j = dim_ - 1; j >= 0; --j) {
        if (++digit[j] < per_dim_) break;
        digit[j] = 0;
      }
    }
    return w;
  }

  /// Multilinear interpolation of grid values at x (supported for d <= 2).
  double interpolate(const Eigen::VectorXd& values, std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("interpolate: point dimension mismatch");
    if (values.size() != static_cast<Eigen::Index>(size()))
      throw std::invalid_argument("interpolate: value vector misaligned with grid");
    if (dim_ == 1) {
      auto [i, t] = locate(x[0]);
      return (1.0 - t) * values(i) + t * values(i + 1);
    }
    if (dim_ == 2) {
      auto [i0, t0] = locate(x[0]);
      auto [i1, t1] = locate(x[1]);
      const auto m = static_cast<std::size_t>(per_dim_);
      const double v00 = values(i0 * m + i1);
      const double v01 = values(i0 * m + i1 + 1);
      const double v10 = values((i0 + 1) * m + i1);
      const double v11 = values((i0 + 1) * m + i1 + 1);
      return (1 - t0) * ((1 - t1) * v00 + t1 * v01) + t0 * ((1 - t1) * v10 + t1 * v11);
    }
    throw std::invalid_argument("interpolate: only d <= 2 supported");
  }

  bool operator==(const Grid& other) const {
    return lo_ == other.lo_ && hi_ == other.hi_ && per_dim_ == other.per_dim_ && dim_ == other.dim_;
  }

 private:
  std::pair<std::size_t, double> locate(double x) const {
    const double s = step();
    double u = (x - lo_) / s;
    if (u < 0.0) u = 0.0;
    auto i = static_cast<std::size_t>(u);
    if (i >= static_cast<std::size_t>(per_dim_ - 1)) i = per_dim_ - 2;
    return {i, u - i};
  }

  double lo_ = 0.0;
  double hi_ = 1.0;
  int per_dim_ = 2;
  int dim_ = 1;
  // Immutable after uniform(); shared so copies stay cheap in hot loops.
  std::shared_ptr<const std::vector<Point>> points_;
};

/// Function values on a finite grid; the concrete representation of
/// latent paths, response probabilities and their derivatives.
struct GridFunction {
  Grid grid;
  Eigen::VectorXd values;

  GridFunction() = default;
  GridFunction(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != static_cast<Eigen::Index>(grid.size()))
      throw std::invalid_argument("GridFunction: values misaligned with grid");
    if (!values.allFinite()) throw std::invalid_argument("GridFunction: non-finite values");
  }

  static GridFunction zero(const Grid& g) { return {g, Eigen::VectorXd::Zero(g.size())}; }

  double operator()(std::span<const double> x) const { return grid.interpolate(values, x); }
  double operator()(const Point& x) const { return grid.interpolate(values, x); }

  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

}  // namespace gpbr
