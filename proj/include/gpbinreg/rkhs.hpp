#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "gpbinreg/gp_sampler.hpp"
#include "gpbinreg/grid.hpp"
#include "gpbinreg/kernels.hpp"
#include "gpbinreg/rng.hpp"

namespace gpbr {

/// Finite kernel expansion x -> sum_i a_i sigma_0(lambda x, lambda t_i).
/// These span the function class the prior concentrates on, and supply the
/// experiments' smooth mean and truth functions.
struct RkhsElement {
  std::shared_ptr<const BaseKernel> base;
  double lambda = 1.0;
  std::vector<Point> nodes;
  Eigen::VectorXd coefficients;

  RkhsElement() : base(make_kernel("squared-exponential")) {}
  RkhsElement(std::shared_ptr<const BaseKernel> kernel, double lambda_, std::vector<Point> nodes_,
              Eigen::VectorXd coeffs);
  static RkhsElement zero(int dim);

  int dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().size()); }
  std::size_t terms() const { return nodes.size(); }

  double evaluate(std::span<const double> x) const;
  double evaluate(const Point& x) const { return evaluate(std::span<const double>(x)); }

  /// D^w of the expansion: lambda^{|w|} sum_i a_i (D^w sigma_0)(lambda x, lambda t_i).
  double derivative(const MultiIndex& w, std::span<const double> x) const;

  GridFunction on_grid(const Grid& g) const;
  GridFunction derivative_on_grid(const MultiIndex& w, const Grid& g) const;
};

/// a^T K a over the deduplicated node set; coincident nodes (within 1e-12 in
/// scaled coordinates) pool their coefficients first.
double rkhs_norm_sq(const RkhsElement& e);

struct ProjectionResult {
  RkhsElement element;
  double sup_error = 0.0;   // max |target - element| over the target's grid
  double ridge_used = 0.0;
};

/// Least-squares projection of a grid target onto span{sigma_0(lambda., lambda t_i)}
/// with RKHS-norm ridge penalty. Throws "increase ridge" when the system is
/// numerically rank-deficient and no ridge was supplied.
ProjectionResult project_to_span(const GridFunction& target, std::vector<Point> nodes,
                                 double lambda, double ridge);

struct SmallBallEstimate {
  double estimate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  std::size_t hits = 0;
  std::size_t draws = 0;
};

/// Monte Carlo estimate of P( sup_grid |W - w0| < eps ) for the zero-mean
/// Gaussian process with the given covariance. Zero hits is a valid outcome.
SmallBallEstimate small_ball_probability(const CovarianceSpec& spec, const RkhsElement& w0,
                                         double eps, const Grid& grid, std::size_t draws,
                                         RngEngine& rng);

}  // namespace gpbr
