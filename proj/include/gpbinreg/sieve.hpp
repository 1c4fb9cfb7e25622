#pragma once

#include <Eigen/Dense>

#include <vector>

#include "gpbinreg/binary_model.hpp"
#include "gpbinreg/grid.hpp"
#include "gpbinreg/posterior.hpp"
#include "gpbinreg/rng.hpp"

namespace gpbr {

/// Derivative-bounded function class: eta belongs iff sup|D^w eta| < M for
/// every multi-index with |w| <= alpha.
struct SieveSpec {
  int dim = 1;
  int alpha = 2;
  double M = 1.0;
  // Provenance of M when generated from a growth schedule (0 = manual).
  double n = 0.0;
  double tau_n = 0.0;
  double lambda_n = 0.0;

  static SieveSpec manual(int dim, int alpha, double M);

  /// Schedule tau_n = n^{-1/r}, lambda_n = n^{1/s},
  /// M_n = sqrt(b1 * n / (tau_n * lambda_n^{-2 alpha})).
  static SieveSpec from_growth(double n, int dim, int alpha, double r, double s, double b1);
};

struct SieveMembership {
  bool member = false;
  std::vector<std::pair<MultiIndex, double>> derivative_norms;  // all |w| <= alpha
};

/// Finite-difference sup-norms of all derivatives up to order alpha, interior
/// stencils only; membership is strict inequality against M.
SieveMembership sieve_member(const GridFunction& eta, const SieveSpec& spec);

struct GrowthCheck {
  bool feasible = false;
  double alpha_bound = 0.0;
  std::string note;
};

/// Smoothness needed for the growth schedule:
/// alpha >= (1 + 1/r) / (2 (1/d - 1/s)), requiring s > d.
GrowthCheck assumption_g_check(int d, int alpha, double r, double s);

struct CoverResult {
  int size = 0;
  std::vector<int> centers;  // indices into the sample
};

/// Greedy sup-norm eps-net over a finite sample of grid functions.
CoverResult covering_number(const std::vector<Eigen::VectorXd>& sample, double eps);

/// Draws a member of the alpha = 2 class: random signs on a fixed cascade of
/// C^2 bumps whose amplitudes saturate the curvature budget M at every scale.
/// Level l contributes m_l bumps at amplitude proportional to M / D_l^2 where
/// D_l is the cumulative bump count, so flipping one level-l sign moves the
/// sup norm by a known step and the family sits on the covering growth curve
/// of the whole class. `levels` selects how many cascade stages are active
/// (at most five).
GridFunction sample_smooth_class(const Grid& grid, double M, int levels, RngEngine& rng);

struct ComplementCurve {
  std::vector<double> M;
  std::vector<double> mass;
  std::vector<double> se;
};

/// Prior mass outside each sieve, estimated with one shared set of prior
/// draws (tau, lambda from the hyperpriors); shared draws make the curve
/// exactly nonincreasing in M.
ComplementCurve sieve_complement_curve(const PriorSpec& prior, const std::vector<SieveSpec>& specs,
                                       std::size_t draws, RngEngine& rng);

double sieve_complement_mass(const PriorSpec& prior, const SieveSpec& spec, std::size_t draws,
                             RngEngine& rng);

struct SeparationResult {
  std::vector<int> above;  // design indices with p > p0 + eps
  std::vector<int> below;  // design indices with p < p0 - eps
  int count() const { return static_cast<int>(above.size() + below.size()); }
};

SeparationResult count_separated(const RealFunction& p, const RealFunction& p0,
                                 const std::vector<Point>& design, double eps);

struct TestResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  double error_bound = 1.0;
};

/// One-sided mean test on a Bernoulli slice: rejects when
/// sum(y_j - mu0_j) exceeds m eps / 2 (or the mirrored variant); the attached
/// bound exp(-m eps^2 / 2) controls both error types at eps-separated means.
TestResult hoeffding_test(const std::vector<int>& y, const std::vector<double>& mu0, double eps,
                          bool upper = true);

/// Max over per-element tests at level eps/2, each restricted to the side of
/// the design where the element is eps-separated from p0; type-I bound
/// N exp(-m_min eps^2 / 8).
TestResult composite_test(const RealFunction& p0, const std::vector<RealFunction>& net,
                          const Dataset& data, double eps);

}  // namespace gpbr
