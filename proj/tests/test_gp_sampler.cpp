#include "doctest.h"
#include "gpbinreg/gp_sampler.hpp"
#include "gpbinreg/rng.hpp"

#include <cmath>
#include <vector>

using namespace gpbr;

namespace {

// Worst standardized deviation of the empirical second moment from the target
// covariance; SE uses the Gaussian fourth-moment formula.
double max_cov_z(const std::vector<Eigen::VectorXd>& draws, const Eigen::MatrixXd& target) {
  const auto n = static_cast<double>(draws.size());
  const Eigen::Index d = target.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (const auto& v : draws) S += v * v.transpose();
  S /= n;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / n);
      worst = std::max(worst, std::abs(S(i, j) - target(i, j)) / se);
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("gp-sampler") {

TEST_CASE("exact sampler covariance matches the gram matrix") {
  CovarianceSpec spec("squared-exponential", 0.8, 1.5, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 9);
  GaussianSampler sampler(spec, grid);
  auto rng = make_stream(411, "unit/exact-cov");
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(40000);
  for (int i = 0; i < 40000; ++i) draws.push_back(sampler.draw_values(rng));
  CHECK(max_cov_z(draws, gram(spec, grid)) < 5.0);
}

TEST_CASE("derivative sampler variance hits 2 lambda^2 / tau") {
  CovarianceSpec spec("squared-exponential", 0.5, 2.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 9);
  auto rng = make_stream(411, "unit/deriv-var");
  const int n = 30000;
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (int i = 0; i < n; ++i) {
    GridFunction d = sample_derivative(spec, MultiIndex({1}), grid, rng);
    sumsq += d.values.cwiseProduct(d.values);
  }
  const double target = 2.0 * 4.0 / 0.5;
  const double se = target * std::sqrt(2.0 / n);
  for (Eigen::Index i = 0; i < sumsq.size(); ++i)
    CHECK(std::abs(sumsq[i] / n - target) < 5.0 * se);
}

TEST_CASE("series draws respect the truncation level") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.5, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 9);
  EigenSystem sys = mercer_decompose(spec, grid);
  const int N = 2;
  Eigen::MatrixXd target = sys.eigenfunctions.leftCols(N) *
                           sys.eigenvalues.head(N).asDiagonal() *
                           sys.eigenfunctions.leftCols(N).transpose();
  KlTruncation trunc(sys, N);
  GridFunction mean = GridFunction::zero(grid);
  auto rng = make_stream(411, "unit/kl-cov");
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(20000);
  for (int i = 0; i < 20000; ++i) {
    trunc.resample(rng);
    draws.push_back(sample_kl(trunc, mean).values);
  }
  CHECK(max_cov_z(draws, target) < 5.0);
}

TEST_CASE("level bounds are enforced and fresh coefficients return the mean") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 7);
  EigenSystem sys = mercer_decompose(spec, grid);
  CHECK_THROWS(KlTruncation(sys, 0));
  CHECK_THROWS(KlTruncation(sys, sys.rank + 1));
  KlTruncation trunc(sys, 3);  // coefficients start at zero until resample
  GridFunction mean(grid, Eigen::VectorXd::Constant(7, 1.25));
  GridFunction out = sample_kl(trunc, mean);
  CHECK((out.values.array() == 1.25).all());
}

TEST_CASE("kl tail shrinks as the level grows") {
  CovarianceSpec spec("squared-exponential", 1.0, 2.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 21);
  EigenSystem sys = mercer_decompose(spec, grid);
  auto rng = make_stream(411, "unit/kl-tail");
  double se1 = 0.0, se8 = 0.0;
  double e1 = truncation_error(sys, 1, 4000, rng, &se1);
  double e8 = truncation_error(sys, 8, 4000, rng, &se8);
  CHECK(e1 > e8 + 4.0 * (se1 + se8));
  CHECK(e8 >= 0.0);
}

TEST_CASE("sup exceedance frequencies decay in the threshold") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 65);
  std::vector<double> thresholds;
  const double sd = std::sqrt(2.0);  // first-derivative sup variance at tau = lambda = 1
  for (double f = 1.5; f <= 3.51; f += 0.5) thresholds.push_back(f * sd);
  auto rng = make_stream(411, "unit/tail-curve");
  auto curve = sup_tail_curve(spec, MultiIndex({1}), grid, thresholds, 20000, rng);
  REQUIRE(curve.size() == thresholds.size());
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].frequency <= curve[i - 1].frequency);
  TailFit fit = fit_tail_curve(curve);
  CHECK(fit.points_used >= 3);
  CHECK(fit.c2 > 0.1);
  CHECK(fit.c2 < 0.5);  // Gaussian sup tail: c2 near 1 / (2 sup-variance) = 0.25
}

TEST_CASE("tail fitter recovers an exact log-linear curve") {
  std::vector<TailPoint> curve;
  for (double m = 1.0; m <= 5.0; m += 1.0)
    curve.push_back({m, std::exp(-0.5 - 0.4 * m * m), 1000});
  TailFit fit = fit_tail_curve(curve);
  CHECK(fit.log_c1 == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(fit.c2 == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.points_used == 5);
}

TEST_CASE("sampler draws are reproducible by stream") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 11);
  GaussianSampler sampler(spec, grid);
  auto r1 = make_stream(7, "unit/repro");
  auto r2 = make_stream(7, "unit/repro");
  CHECK(sampler.draw_values(r1) == sampler.draw_values(r2));
}

}  // TEST_SUITE
