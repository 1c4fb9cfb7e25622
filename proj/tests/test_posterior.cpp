#include "doctest.h"
#include "gpbinreg/posterior.hpp"
#include "gpbinreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace gpbr;

namespace {

Dataset toy_data(int n, std::uint64_t seed) {
  auto rng = make_stream(seed, "unit/toy-data");
  RealFunction p0 = [](const Point& x) { return 0.25 + 0.5 * x[0]; };
  return simulate(p0, DesignSpec{}, static_cast<std::size_t>(n), rng);
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("bandwidth ladder snaps to rungs") {
  PriorSpec prior;
  prior.grid = Grid::uniform(0.0, 1.0, 17);
  EigenCache cache(prior);
  REQUIRE(cache.rungs() == 64);
  CHECK(cache.rung_value(0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(cache.rung_value(63) == doctest::Approx(6.0).epsilon(1e-12));
  for (int k : {0, 17, 40, 63}) {
    CHECK(cache.snap(cache.rung_value(k)) == k);
    CHECK(cache.snap(cache.rung_value(k) * 1.0001) == k);
  }
  CHECK(cache.snap(1e-4) == 0);
  CHECK(cache.snap(250.0) == 63);
  // geometric ladder: constant log step
  const double step = std::log(cache.rung_value(1)) - std::log(cache.rung_value(0));
  CHECK(cache.log_step() == doctest::Approx(step).epsilon(1e-12));
}

TEST_CASE("eigensystems are cached per rung") {
  PriorSpec prior;
  prior.grid = Grid::uniform(0.0, 1.0, 17);
  EigenCache cache(prior);
  const EigenSystem& a = cache.at(10);
  const EigenSystem& b = cache.at(10);
  CHECK(&a == &b);
  CHECK(a.rank >= 1);
}

TEST_CASE("chain output is invariant to data relabeling") {
  Dataset data = toy_data(10, 31);
  Dataset shuffled = data;
  std::reverse(shuffled.x.begin(), shuffled.x.end());
  std::reverse(shuffled.y.begin(), shuffled.y.end());

  PriorSpec prior;
  prior.truncation = 8;
  prior.grid = Grid::uniform(0.0, 1.0, 17);
  auto r1 = make_stream(31, "unit/relabel");
  auto r2 = make_stream(31, "unit/relabel");
  ChainResult a = run_chain(prior, data, 300, 100, r1);
  ChainResult b = run_chain(prior, shuffled, 300, 100, r2);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); i += 37) {
    CHECK(a.draws[i].tau == b.draws[i].tau);
    CHECK(a.draws[i].lambda == b.draws[i].lambda);
    CHECK(a.draws[i].log_lik == b.draws[i].log_lik);
    CHECK(a.draws[i].xi == b.draws[i].xi);
  }
}

TEST_CASE("fixed hyperparameters freeze their blocks") {
  Dataset data = toy_data(8, 32);
  PriorSpec prior;
  prior.truncation = 6;
  prior.grid = Grid::uniform(0.0, 1.0, 17);
  prior.fixed_tau = 1.7;
  prior.fixed_lambda = 2.0;
  auto rng = make_stream(32, "unit/fixed");
  ChainResult res = run_chain(prior, data, 200, 50, rng);
  REQUIRE(!res.draws.empty());
  for (const auto& d : res.draws) {
    CHECK(d.tau == 1.7);
    CHECK(d.lambda == res.draws.front().lambda);  // single-rung ladder
  }
  CHECK(res.diagnostics.eigen_failures == 0);
}

TEST_CASE("empty dataset yields prior draws") {
  PriorSpec prior;
  prior.truncation = 4;
  prior.grid = Grid::uniform(0.0, 1.0, 17);
  Dataset empty;
  auto rng = make_stream(33, "unit/empty-data");
  ChainResult res = run_chain(prior, empty, 400, 100, rng);
  CHECK(res.draws.size() == 300);
  CHECK(res.diagnostics.xi_accept == 1.0);
  for (std::size_t i = 0; i < res.draws.size(); i += 29) {
    CHECK(res.draws[i].log_lik == 0.0);
    CHECK(res.draws[i].tau > 0.0);
    CHECK(res.draws[i].lambda >= 0.05);
    CHECK(res.draws[i].lambda <= 6.0);
    CHECK(res.draws[i].p.values.minCoeff() >= 0.0);
    CHECK(res.draws[i].p.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("posterior mass outside a ball") {
  Grid grid = Grid::uniform(0.0, 1.0, 9);
  auto constant_draw = [&](double p) {
    PosteriorDraw d;
    d.xi = Eigen::VectorXd::Zero(1);
    d.eta = GridFunction::zero(grid);
    d.p = GridFunction(grid, Eigen::VectorXd::Constant(9, p));
    return d;
  };
  std::vector<PosteriorDraw> draws{constant_draw(0.5), constant_draw(0.9)};
  RealFunction p0 = [](const Point&) { return 0.5; };
  L1Measure measure = L1Measure::lebesgue(grid);
  CHECK(posterior_l1_mass(draws, p0, 0.2, measure) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(posterior_l1_mass(draws, p0, 0.5, measure) == 0.0);
  CHECK(posterior_l1_mass(draws, p0, 1e-9, measure) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("posterior summary pools draws pointwise") {
  Grid grid = Grid::uniform(0.0, 1.0, 5);
  std::vector<PosteriorDraw> draws;
  for (int i = 0; i <= 100; ++i) {
    PosteriorDraw d;
    d.p = GridFunction(grid, Eigen::VectorXd::Constant(5, i / 100.0));
    d.eta = d.p;
    d.xi = Eigen::VectorXd::Zero(1);
    draws.push_back(std::move(d));
  }
  PosteriorSummary s = posterior_summary(draws, {0.1, 0.5, 0.9});
  CHECK(s.mean.values[2] == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(s.quantiles.size() == 3);
  CHECK(s.quantiles[0].second.values[0] == doctest::Approx(0.1).epsilon(0.03));
  CHECK(s.quantiles[1].second.values[0] == doctest::Approx(0.5).epsilon(0.03));
  CHECK(s.quantiles[2].second.values[0] == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("effective sample size separates iid from sticky traces") {
  auto rng = make_stream(34, "unit/ess");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> iid(4000), walk(4000);
  double acc = 0.0;
  for (int i = 0; i < 4000; ++i) {
    iid[static_cast<std::size_t>(i)] = normal(rng);
    acc += normal(rng);
    walk[static_cast<std::size_t>(i)] = acc;
  }
  const double ess_iid = effective_sample_size(iid);
  CHECK(ess_iid > 2500.0);
  CHECK(ess_iid < 5500.0);
  CHECK(effective_sample_size(walk) < 400.0);
}

TEST_CASE("split rhat flags a mean shift") {
  std::vector<double> mixed, drifting;
  auto rng = make_stream(35, "unit/rhat");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    mixed.push_back(normal(rng));
    drifting.push_back(normal(rng) + (i < 1000 ? 0.0 : 3.0));
  }
  CHECK(split_rhat(mixed) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(split_rhat(drifting) > 1.2);
}

TEST_CASE("prior spec validation rejects nonsense") {
  PriorSpec bad;
  bad.truncation = 0;
  CHECK_THROWS(bad.validate());
  PriorSpec ladder;
  ladder.ladder_lo = 3.0;
  ladder.ladder_hi = 0.5;
  CHECK_THROWS(ladder.validate());
}

}  // TEST_SUITE
