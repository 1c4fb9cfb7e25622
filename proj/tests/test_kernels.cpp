#include "doctest.h"
#include "gpbinreg/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace gpbr;

namespace {

double fd_in_v(const BaseKernel& k, const MultiIndex& w, const Point& u, Point v, int axis,
               double h) {
  v[static_cast<std::size_t>(axis)] += h;
  double hi = k.section_derivative(w, u, v);
  v[static_cast<std::size_t>(axis)] -= 2.0 * h;
  double lo = k.section_derivative(w, u, v);
  return (hi - lo) / (2.0 * h);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("squared exponential point values") {
  SquaredExponentialKernel k;
  Point u{0.3}, v{0.7};
  CHECK(k.evaluate(u, v) == doctest::Approx(0.8521437889662113).epsilon(1e-14));
  CHECK(k.evaluate(u, u) == doctest::Approx(1.0).epsilon(1e-15));
  Point a{0.1, 0.9}, b{0.4, 0.5};
  CHECK(k.evaluate(a, b) == doctest::Approx(0.7788007830714049).epsilon(1e-14));
  CHECK(k.evaluate(a, b) == k.evaluate(b, a));
}

TEST_CASE("first mixed derivative closed form") {
  SquaredExponentialKernel k;
  Point u{0.3}, v{0.7};
  // d_u d_v exp(-(u-v)^2) = (2 - 4 r^2) exp(-r^2) with r = u - v.
  CHECK(k.mixed_derivative(MultiIndex({1}), u, v) ==
        doctest::Approx(1.1589155529940476).epsilon(1e-13));
  CHECK(k.section_derivative(MultiIndex({2}), u, v) ==
        doctest::Approx(-1.1589155529940476).epsilon(1e-13));
  // Diagonal of the first-derivative covariance: value 2 everywhere.
  CHECK(k.mixed_derivative(MultiIndex({1}), u, u) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("derivative ladder agrees with finite differences") {
  SquaredExponentialKernel k;
  Point u{0.35}, v{0.62};
  // Each section derivative of order n is the FD quotient of order n-1 in u;
  // chaining from the plain kernel gives an oracle independent of the
  // Hermite recurrence.
  const double h = 1e-5;
  for (int n = 1; n <= 4; ++n) {
    MultiIndex wn({n}), wp({n - 1});
    Point up = u, um = u;
    up[0] += h;
    um[0] -= h;
    double fd = (k.section_derivative(wp, up, v) - k.section_derivative(wp, um, v)) / (2.0 * h);
    CHECK(k.section_derivative(wn, u, v) == doctest::Approx(fd).epsilon(1e-5));
  }
  // Mixed derivative is the FD quotient of the section derivative in v.
  for (int n = 1; n <= 3; ++n) {
    MultiIndex w({n});
    double fd = fd_in_v(k, w, u, v, 0, 1e-5);
    double fd2 = 0.0;
    if (n >= 2) {
      // d^n_u d^n_v needs n v-derivatives; build by nested central quotients.
      const double hh = 3e-3;
      auto g = [&](double dv) {
        Point vv = v;
        vv[0] += dv;
        return k.section_derivative(w, u, vv);
      };
      if (n == 2) fd2 = (g(hh) - 2.0 * g(0.0) + g(-hh)) / (hh * hh);
      if (n == 3)
        fd2 = (g(2 * hh) - 2.0 * g(hh) + 2.0 * g(-hh) - g(-2 * hh)) / (2.0 * hh * hh * hh);
    }
    if (n == 1) {
      CHECK(k.mixed_derivative(w, u, v) == doctest::Approx(fd).epsilon(1e-6));
    } else {
      CHECK(k.mixed_derivative(w, u, v) == doctest::Approx(fd2).epsilon(5e-3));
    }
  }
}

TEST_CASE("mixed derivatives factor over dimensions") {
  SquaredExponentialKernel k;
  Point u{0.2, 0.8}, v{0.5, 0.4};
  Point u1{0.2}, v1{0.5}, u2{0.8}, v2{0.4};
  MultiIndex w({1, 2});
  double expect = k.mixed_derivative(MultiIndex({1}), u1, v1) *
                  k.mixed_derivative(MultiIndex({2}), u2, v2);
  CHECK(k.mixed_derivative(w, u, v) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("covariance spec rescales the base kernel") {
  CovarianceSpec spec("squared-exponential", 2.5, 3.0, 1);
  Point s{0.3}, t{0.7};
  SquaredExponentialKernel base;
  Point ls{0.9}, lt{2.1};
  CHECK(spec.evaluate(s, t) == doctest::Approx(base.evaluate(ls, lt) / 2.5).epsilon(1e-14));
  MultiIndex w({1});
  double expect = std::pow(3.0, 2) / 2.5 * base.mixed_derivative(w, ls, lt);
  CHECK(spec.derivative(w, s, t) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("gram matrices are symmetric and nonnegative definite") {
  CovarianceSpec spec("squared-exponential", 1.0, 4.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 17);
  Eigen::MatrixXd K = gram(spec, grid);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * K.trace());
}

TEST_CASE("derivative gram diagonal equals 2 lambda^2 / tau") {
  CovarianceSpec spec("squared-exponential", 0.5, 2.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 9);
  Eigen::MatrixXd K = gram(spec, grid, MultiIndex({1}));
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    CHECK(K(i, i) == doctest::Approx(2.0 * 4.0 / 0.5).epsilon(1e-12));
}

TEST_CASE("gram rejects duplicate points") {
  CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  std::vector<Point> pts{{0.2}, {0.2}};
  CHECK_THROWS(gram(spec, pts, MultiIndex::zero(1)));
}

TEST_CASE("mercer decomposition reconstructs the gram matrix") {
  CovarianceSpec spec("squared-exponential", 1.3, 2.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 33);
  EigenSystem sys = mercer_decompose(spec, grid);
  Eigen::MatrixXd K = gram(spec, grid);
  Eigen::MatrixXd recon =
      sys.eigenfunctions * sys.eigenvalues.asDiagonal() * sys.eigenfunctions.transpose();
  CHECK((recon - K).cwiseAbs().maxCoeff() <= 1e-7 * K.trace());
  for (Eigen::Index i = 1; i < sys.eigenvalues.size(); ++i)
    CHECK(sys.eigenvalues[i] <= sys.eigenvalues[i - 1] + 1e-15);
  CHECK(sys.eigenvalues.minCoeff() >= 0.0);
  CHECK(sys.rank >= 1);
  CHECK(sys.rank <= static_cast<int>(grid.size()));
  CHECK(sys.weights.minCoeff() > 0.0);
}

TEST_CASE("nystrom extension reproduces eigenvectors at the nodes") {
  CovarianceSpec spec("squared-exponential", 1.0, 2.0, 1);
  Grid grid = Grid::uniform(0.0, 1.0, 21);
  EigenSystem sys = mercer_decompose(spec, grid);
  for (int k = 0; k < std::min(sys.rank, 4); ++k) {
    for (std::size_t i = 0; i < grid.size(); i += 5) {
      CHECK(sys.extend(spec, k, grid.point(i)) ==
            doctest::Approx(sys.eigenfunctions(static_cast<Eigen::Index>(i), k)).epsilon(1e-8));
    }
  }
}

TEST_CASE("grid refinement stabilizes the spectrum") {
  // lambda = 8 is barely resolved on 9 points; the leading eigenvalue must
  // settle as the grid refines.
  CovarianceSpec spec("squared-exponential", 1.0, 8.0, 1);
  double e9 = mercer_decompose(spec, Grid::uniform(0.0, 1.0, 9)).eigenvalues[0];
  double e17 = mercer_decompose(spec, Grid::uniform(0.0, 1.0, 17)).eigenvalues[0];
  double e33 = mercer_decompose(spec, Grid::uniform(0.0, 1.0, 33)).eigenvalues[0];
  double e65 = mercer_decompose(spec, Grid::uniform(0.0, 1.0, 65)).eigenvalues[0];
  CHECK(std::abs(e33 - e17) < std::abs(e17 - e9));
  CHECK(std::abs(e65 - e33) < std::abs(e33 - e17));
  CHECK(std::abs(e65 - e33) / e65 < 0.02);
}

TEST_CASE("jitter factorization handles rank deficiency") {
  Eigen::MatrixXd K = Eigen::MatrixXd::Ones(5, 5);  // rank one
  Eigen::MatrixXd L = cholesky_with_jitter(K);
  CHECK((L * L.transpose() - K).cwiseAbs().maxCoeff() <= 1e-5 * K.trace());
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite beyond any jitter rung
  CHECK_THROWS(cholesky_with_jitter(bad));
}

TEST_CASE("kernel registry") {
  CHECK(make_kernel("squared-exponential")->name() == "squared-exponential");
  CHECK_THROWS(make_kernel("no-such-family"));
}

}  // TEST_SUITE
