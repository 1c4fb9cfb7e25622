#include "doctest.h"
#include "gpbinreg/rkhs.hpp"
#include "gpbinreg/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace gpbr;

namespace {

RkhsElement element(double lambda, std::vector<Point> nodes, std::vector<double> coeffs) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) a[static_cast<Eigen::Index>(i)] = coeffs[i];
  return {make_kernel("squared-exponential"), lambda, std::move(nodes), std::move(a)};
}

}  // namespace

TEST_SUITE("rkhs") {

TEST_CASE("norm of a single atom") {
  RkhsElement e = element(1.0, {{0.3}}, {2.0});
  CHECK(rkhs_norm_sq(e) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("norm of two atoms") {
  // a^T K a with K_01 = exp(-(2*0.2 - 2*0.6)^2) = exp(-0.64).
  RkhsElement e = element(2.0, {{0.2}, {0.6}}, {1.0, -1.0});
  CHECK(rkhs_norm_sq(e) == doctest::Approx(0.9454151519139029).epsilon(1e-13));
}

TEST_CASE("coincident nodes pool their coefficients") {
  RkhsElement split = element(1.5, {{0.3}, {0.3}}, {1.0, 2.0});
  RkhsElement merged = element(1.5, {{0.3}}, {3.0});
  CHECK(rkhs_norm_sq(split) == doctest::Approx(9.0).epsilon(1e-13));
  Point x{0.55};
  CHECK(split.evaluate(x) == doctest::Approx(merged.evaluate(x)).epsilon(1e-14));
}

TEST_CASE("expansion derivative matches finite differences") {
  RkhsElement e = element(3.0, {{0.25}, {0.75}}, {0.7, -1.2});
  const double h = 1e-6;
  for (double x : {0.1, 0.4, 0.9}) {
    Point p{x}, hi{x + h}, lo{x - h};
    double fd = (e.evaluate(hi) - e.evaluate(lo)) / (2.0 * h);
    CHECK(e.derivative(MultiIndex({1}), p) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("projection recovers a span member exactly") {
  RkhsElement truth = element(3.0, {{0.25}, {0.75}}, {0.7, -1.2});
  Grid grid = Grid::uniform(0.0, 1.0, 41);
  ProjectionResult proj = project_to_span(truth.on_grid(grid), {{0.25}, {0.75}}, 3.0, 0.0);
  CHECK(proj.sup_error < 1e-8);
  CHECK(proj.element.coefficients[0] == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(proj.element.coefficients[1] == doctest::Approx(-1.2).epsilon(1e-6));
}

TEST_CASE("projection error shrinks on nested node sets") {
  Grid grid = Grid::uniform(0.0, 1.0, 201);
  Eigen::VectorXd target(201);
  for (int i = 0; i < 201; ++i)
    target[i] = std::sin(2.0 * std::numbers::pi * grid.point(static_cast<std::size_t>(i))[0]);
  GridFunction f(grid, target);

  std::vector<double> errors;
  for (int m : {11, 21, 41}) {
    std::vector<Point> nodes;
    for (int i = 0; i < m; ++i) nodes.push_back({static_cast<double>(i) / (m - 1)});
    errors.push_back(project_to_span(f, nodes, 5.0, 1e-8).sup_error);
  }
  CHECK(errors[1] <= errors[0]);
  CHECK(errors[2] <= errors[1]);
  CHECK(errors[2] < 1e-3);
}

TEST_CASE("rank-deficient projection demands a ridge") {
  Grid grid = Grid::uniform(0.0, 1.0, 21);
  GridFunction f = GridFunction::zero(grid);
  // 40 nearly coincident nodes at lambda = 0.1: numerically rank deficient.
  std::vector<Point> nodes;
  for (int i = 0; i < 40; ++i) nodes.push_back({0.5 + 1e-9 * i});
  CHECK_THROWS(project_to_span(f, nodes, 0.1, 0.0));
}

TEST_CASE("small ball probability grows with the radius") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 33);
  RkhsElement center = RkhsElement::zero(1);
  auto r1 = make_stream(99, "unit/small-ball", 0);
  auto r2 = make_stream(99, "unit/small-ball", 1);
  SmallBallEstimate wide = small_ball_probability(spec, center, 2.0, grid, 4000, r1);
  SmallBallEstimate narrow = small_ball_probability(spec, center, 0.7, grid, 4000, r2);
  CHECK(wide.draws == 4000);
  CHECK(wide.estimate <= 1.0);
  CHECK(narrow.hits > 0);
  CHECK(wide.wilson_lo > narrow.wilson_hi);
}

TEST_CASE("distant centers are harder to hit") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 33);
  RkhsElement far = element(1.0, {{0.5}}, {2.5});
  auto r1 = make_stream(99, "unit/small-ball-far", 0);
  auto r2 = make_stream(99, "unit/small-ball-far", 1);
  SmallBallEstimate zero = small_ball_probability(spec, RkhsElement::zero(1), 0.9, grid, 4000, r1);
  SmallBallEstimate shifted = small_ball_probability(spec, far, 0.9, grid, 4000, r2);
  CHECK(zero.estimate > shifted.estimate);
}

}  // TEST_SUITE
