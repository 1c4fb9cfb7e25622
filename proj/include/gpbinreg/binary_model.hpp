#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpbinreg/grid.hpp"
#include "gpbinreg/rkhs.hpp"
#include "gpbinreg/rng.hpp"

namespace gpbr {

/// Scalar probability clamp used everywhere a probability feeds a log.
inline double clamp_prob(double p) {
  if (p < 1e-12) return 1e-12;
  if (p > 1.0 - 1e-12) return 1.0 - 1e-12;
  return p;
}

/// Strictly increasing Lipschitz CDF mapping the latent function to a
/// response probability.
class LinkFunction {
 public:
  enum class Family { probit, logistic };

  static LinkFunction probit() { return LinkFunction(Family::probit); }
  static LinkFunction logistic() { return LinkFunction(Family::logistic); }
  static LinkFunction by_name(const std::string& name);

  Family family() const { return family_; }
  std::string name() const;

  double forward(double u) const;
  double inverse(double p) const;
  double lipschitz() const;

  double operator()(double u) const { return forward(u); }

 private:
  explicit LinkFunction(Family f) : family_(f) {}
  Family family_;
};

enum class DesignKind { random_q, fixed_grid, fixed_custom };

enum class CovariateDistribution { uniform, beta_2_5 };

/// How covariates arise: iid draws from Q, a deterministic interior grid, or
/// an explicit point list.
struct DesignSpec {
  DesignKind kind = DesignKind::random_q;
  CovariateDistribution q = CovariateDistribution::uniform;
  int dim = 1;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Point> custom;
  bool sort_covariates = false;  // ascending by first coordinate (d=1 designs)

  Point draw_q(RngEngine& rng) const;
  std::vector<Point> make(std::size_t n, RngEngine& rng) const;
};

struct Dataset {
  std::vector<Point> x;
  std::vector<int> y;
  DesignKind design = DesignKind::random_q;

  std::size_t n() const { return x.size(); }
  int dim() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }

  void to_csv(std::ostream& os) const;
  static Dataset from_csv(std::istream& is);
};

using RealFunction = std::function<double(const Point&)>;

inline RealFunction as_function(const GridFunction& g) {
  return [g](const Point& x) { return g(x); };
}

/// p0 composed from a latent function and a link, the experiments' truth.
RealFunction response_function(const RkhsElement& eta0, const LinkFunction& link);

/// n Bernoulli observations at design covariates; p0 must map into (0, 1).
Dataset simulate(const RealFunction& p0, const DesignSpec& design, std::size_t n, RngEngine& rng);

double log_likelihood(const RealFunction& p, const Dataset& data);
double log_likelihood(const GridFunction& p, const Dataset& data);

/// Weighting measure for the L1 / KL functionals: Monte Carlo draws from Q,
/// the empirical design measure, or Lebesgue quadrature on a grid.
struct L1Measure {
  enum class Kind { mc_q, empirical, lebesgue };
  Kind kind = Kind::lebesgue;
  std::vector<Point> points;
  Eigen::VectorXd weights;  // sums to 1 for mc_q/empirical, to |X| for lebesgue

  static L1Measure monte_carlo_q(const DesignSpec& q, std::size_t draws, RngEngine& rng);
  static L1Measure empirical(const Dataset& data);
  static L1Measure lebesgue(const Grid& grid);
};

double l1_distance(const RealFunction& p, const RealFunction& p0, const L1Measure& measure);

/// Bernoulli-field Kullback-Leibler divergence of p from p0 under the measure.
double kl_divergence(const RealFunction& p0, const RealFunction& p, const L1Measure& measure);

/// Largest value of [a(log a/b)^m + (1-a)(log((1-a)/(1-b)))^m] / (a-b)^2 over
/// [eps0, 1-eps0]^2, the constant that dominates KL by squared sup-distance.
double fit_quadratic_kl_constant(double eps0, int m, int grid_n = 201);

}  // namespace gpbr
