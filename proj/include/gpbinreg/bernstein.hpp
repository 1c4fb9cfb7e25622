#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace gpbr {

using ScalarFunction = std::function<double(double)>;

/// Averaged Bernstein operator on [0,1]:
/// b(x,k,h) = k * sum_j (integral of h over cell j) * C(k-1,j-1) x^{j-1} (1-x)^{k-j}.
/// Cell integrals are precomputed with composite Gauss-Legendre quadrature
/// (16 nodes per cell, exact through degree 7).
class BernsteinOperator {
 public:
  BernsteinOperator(const ScalarFunction& h, int k);

  int order() const { return k_; }
  double operator()(double x) const;
  double cell_integral(int j) const { return integrals_.at(static_cast<std::size_t>(j)); }

 private:
  int k_;
  std::vector<double> integrals_;  // integral of h over [(j-1)/k, j/k], j = 1..k
};

double bernstein(const ScalarFunction& h, int k, double x);

struct BernsteinErrorReport {
  double sup_error = 0.0;
  // error * k / sup|h''|; empty when h is affine (sup|h''| ~ 0) and the
  // curvature-normalized constant is undefined.
  std::optional<double> fitted_A;
};

BernsteinErrorReport bernstein_error(const ScalarFunction& h, const ScalarFunction& h_second,
                                     int k, int grid_points = 1024);

using Interval = std::pair<double, double>;

/// Maximal subintervals of [0,1] where |b(.,k,p) - b(.,k,p0)| > 2 eps, located
/// by scanning 16k points and bisecting each crossing to 1e-10. The gap is a
/// polynomial of degree below k, so at most k intervals can appear.
std::vector<Interval> b_p_intervals(const ScalarFunction& p, const ScalarFunction& p0, int k_n,
                                    double eps);

struct DesignSpacing {
  std::vector<double> x;       // sorted covariates
  std::vector<double> spacing; // consecutive gaps

  explicit DesignSpacing(std::vector<double> sorted_x);
};

struct SpacingAudit {
  bool satisfied = false;
  double sparse_mass = 0.0;  // total length of spacings wider than K1/n
  int covered_points = 0;    // endpoints of narrow spacings inside the intervals
};

/// Checks that oversized spacings carry at most delta total length; when an
/// interval family is supplied, also counts the distinct design points that
/// bound narrow spacings fully contained in the family's union.
SpacingAudit spacing_audit(const DesignSpacing& design, double K1, double delta,
                           const std::vector<Interval>& intervals = {});

}  // namespace gpbr
