#include "doctest.h"
#include "gpbinreg/bernstein.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace gpbr;

namespace {

// Independent reimplementation: Pascal-row binomials and Simpson cell
// integrals, nothing shared with the library operator.
double brute_bernstein(const ScalarFunction& h, int k, double x) {
  std::vector<double> binom(static_cast<std::size_t>(k), 0.0);
  binom[0] = 1.0;  // build row k-1 of Pascal's triangle in place
  for (int j = 1; j < k; ++j) {
    for (int i = j; i >= 1; --i) binom[static_cast<std::size_t>(i)] += binom[static_cast<std::size_t>(i - 1)];
  }
  auto simpson_cell = [&](double a, double b) {
    const int n = 128;
    const double w = (b - a) / n;
    double acc = h(a) + h(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * h(a + w * i);
    return acc * w / 3.0;
  };
  double out = 0.0;
  for (int j = 1; j <= k; ++j) {
    double cell = simpson_cell(static_cast<double>(j - 1) / k, static_cast<double>(j) / k);
    out += cell * binom[static_cast<std::size_t>(j - 1)] * std::pow(x, j - 1) *
           std::pow(1.0 - x, k - j);
  }
  return k * out;
}

}  // namespace

TEST_SUITE("bernstein") {

TEST_CASE("operator matches a brute force evaluation") {
  ScalarFunction h = [](double t) { return std::sin(2.0 * std::numbers::pi * t) + 0.3 * t; };
  const int k = 23;
  BernsteinOperator op(h, k);
  for (double x : {0.0, 0.17, 0.5, 0.83, 1.0}) {
    CHECK(op(x) == doctest::Approx(brute_bernstein(h, k, x)).epsilon(1e-10));
  }
}

TEST_CASE("constants are reproduced exactly") {
  for (double c : {0.0, 0.37, 1.0}) {
    ScalarFunction h = [c](double) { return c; };
    for (int k : {1, 7, 40}) {
      BernsteinOperator op(h, k);
      for (double x : {0.0, 0.25, 0.9, 1.0}) CHECK(op(x) == doctest::Approx(c).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear and quadratic closed forms") {
  ScalarFunction id = [](double t) { return t; };
  ScalarFunction sq = [](double t) { return t * t; };
  for (int k : {5, 10, 31}) {
    BernsteinOperator opl(id, k), opq(sq, k);
    for (double x : {0.1, 0.5, 0.77}) {
      CHECK(opl(x) == doctest::Approx(x + (1.0 - 2.0 * x) / (2.0 * k)).epsilon(1e-12));
      // cell-averaged quadratic: ((k-1)(k-2) x^2 + 2 (k-1) x + 1/3) / k^2
      double expect = ((k - 1.0) * (k - 2.0) * x * x + 2.0 * (k - 1.0) * x + 1.0 / 3.0) / (k * k);
      CHECK(opq(x) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK(bernstein(sq, 10, 0.5) == doctest::Approx(0.2733333333333333).epsilon(1e-13));
}

TEST_CASE("error decays like 1/k for curved functions") {
  ScalarFunction h = [](double t) { return std::exp(t); };
  ScalarFunction h2 = h;  // exp is its own second derivative
  BernsteinErrorReport e64 = bernstein_error(h, h2, 64);
  BernsteinErrorReport e128 = bernstein_error(h, h2, 128);
  CHECK(e128.sup_error < e64.sup_error);
  CHECK(e128.sup_error / e64.sup_error == doctest::Approx(0.5).epsilon(0.12));
  REQUIRE(e64.fitted_A.has_value());
  REQUIRE(e128.fitted_A.has_value());
  CHECK(*e64.fitted_A == doctest::Approx(*e128.fitted_A).epsilon(0.1));
}

TEST_CASE("affine functions have no curvature constant") {
  ScalarFunction h = [](double t) { return 2.0 * t + 1.0; };
  ScalarFunction zero = [](double) { return 0.0; };
  BernsteinErrorReport rep = bernstein_error(h, zero, 25);
  CHECK(!rep.fitted_A.has_value());
  // cell averaging shifts an affine h by slope (1 - 2x) / (2k); sup at the ends
  CHECK(rep.sup_error == doctest::Approx(2.0 / (2.0 * 25.0)).epsilon(1e-9));
}

TEST_CASE("interval extraction counts excursions") {
  auto bump = [](double u) { return u <= 0.0 || u >= 1.0 ? 0.0 : 16.0 * u * u * (1.0 - u) * (1.0 - u); };
  ScalarFunction p0 = [](double) { return 0.5; };
  ScalarFunction one_bump = [&](double t) { return 0.5 + 0.3 * bump((t - 0.3) / 0.4); };
  ScalarFunction two_bump = [&](double t) {
    return 0.5 + 0.3 * bump((t - 0.05) / 0.4) - 0.3 * bump((t - 0.55) / 0.4);
  };

  auto one = b_p_intervals(one_bump, p0, 40, 0.05);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first > 0.3);
  CHECK(one[0].second < 0.7);

  CHECK(b_p_intervals(two_bump, p0, 40, 0.05).size() == 2);
  CHECK(b_p_intervals(p0, p0, 40, 0.05).empty());
  CHECK(b_p_intervals(one_bump, p0, 40, 0.2).empty());
}

TEST_CASE("spacing audit accepts even designs and rejects clustered ones") {
  std::vector<double> even;
  for (int i = 0; i < 100; ++i) even.push_back(i / 99.0);
  DesignSpacing d(even);
  SpacingAudit ok = spacing_audit(d, 10.0, 0.05);
  CHECK(ok.satisfied);
  CHECK(ok.sparse_mass == 0.0);

  std::vector<double> clustered;
  for (int i = 0; i < 50; ++i) clustered.push_back(i * 0.0002);
  for (int i = 0; i < 50; ++i) clustered.push_back(0.99 + i * 0.0002);
  SpacingAudit bad = spacing_audit(DesignSpacing(clustered), 10.0, 0.05);
  CHECK(!bad.satisfied);
  CHECK(bad.sparse_mass > 0.9);
}

TEST_CASE("audit marks narrow pairs inside the excursion intervals") {
  std::vector<double> even;
  for (int i = 0; i < 100; ++i) even.push_back(i / 99.0);
  SpacingAudit audit = spacing_audit(DesignSpacing(even), 10.0, 0.05, {{0.2, 0.4}});
  // pairs (x_i, x_{i+1}) fully inside [0.2, 0.4]: i = 20..38, marking 20..39
  CHECK(audit.covered_points == 20);
}

TEST_CASE("degenerate inputs throw") {
  ScalarFunction h = [](double t) { return t; };
  CHECK_THROWS(BernsteinOperator(h, 0));
  CHECK_THROWS(bernstein(h, 5, 1.5));
  CHECK_THROWS(DesignSpacing(std::vector<double>{}));
  CHECK_THROWS(DesignSpacing(std::vector<double>{0.5, 0.2}));
  CHECK_THROWS(b_p_intervals(h, h, 4, 0.0));
}

}  // TEST_SUITE
