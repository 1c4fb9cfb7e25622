#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "gpbinreg/grid.hpp"
#include "gpbinreg/kernels.hpp"
#include "gpbinreg/rng.hpp"

namespace gpbr {

/// Draws exact Gaussian paths on a fixed point set. The covariance factor is
/// computed once at construction so Monte Carlo batches amortize it.
class GaussianSampler {
 public:
  GaussianSampler(const CovarianceSpec& spec, std::vector<Point> points, const MultiIndex& w);
  GaussianSampler(const CovarianceSpec& spec, const Grid& grid, const MultiIndex& w);
  GaussianSampler(const CovarianceSpec& spec, const Grid& grid)
      : GaussianSampler(spec, grid, MultiIndex::zero(spec.dim)) {}

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }

  /// Zero-mean draw as a raw value vector.
  Eigen::VectorXd draw_values(RngEngine& rng) const;

  /// Draw on the construction grid (throws if built from a bare point list).
  GridFunction draw(RngEngine& rng) const;
  GridFunction draw(const GridFunction& mean, RngEngine& rng) const;

 private:
  std::optional<Grid> grid_;
  std::vector<Point> points_;
  Eigen::MatrixXd chol_;
};

GridFunction sample_exact(const CovarianceSpec& spec, const GridFunction& mean, RngEngine& rng);

GridFunction sample_derivative(const CovarianceSpec& spec, const MultiIndex& w, const Grid& grid,
                               RngEngine& rng);

/// Truncated Karhunen-Loeve representation: coefficients xi over the leading
/// N eigenpairs of a grid eigensystem.
struct KlTruncation {
  EigenSystem eigen;
  int N = 0;
  Eigen::VectorXd xi;

  KlTruncation(EigenSystem sys, int level);
  void resample(RngEngine& rng);
};

/// mean + sum_{k<N} sqrt(lambda_k) xi_k psi_k on the eigensystem's grid.
GridFunction sample_kl(const KlTruncation& trunc, const GridFunction& mean);

/// Monte Carlo estimate of E[ sup_grid |W - W_N|^2 ], the squared sup-norm of
/// the KL tail beyond level N. Optional output: the Monte Carlo SE.
double truncation_error(const EigenSystem& eigen, int N, std::size_t draws, RngEngine& rng,
                        double* se_out = nullptr);

struct TailPoint {
  double threshold = 0.0;
  double frequency = 0.0;
  std::size_t hits = 0;
};

/// Empirical exceedance frequencies of sup_grid |D^w eta| over each threshold.
std::vector<TailPoint> sup_tail_curve(const CovarianceSpec& spec, const MultiIndex& w,
                                      const Grid& grid, const std::vector<double>& thresholds,
                                      std::size_t draws, RngEngine& rng);

/// Least-squares fit of log frequency = log_c1 - c2 * M^2 over curve points
/// with at least min_hits exceedances.
struct TailFit {
  double log_c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

TailFit fit_tail_curve(const std::vector<TailPoint>& curve, std::size_t min_hits = 10);

}  // namespace gpbr
