#include "gpbinreg/gp_sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace gpbr {

GaussianSampler::GaussianSampler(const CovarianceSpec& spec, std::vector<Point> points,
                                 const MultiIndex& w)
    : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("sampler needs at least one point");
  Eigen::MatrixXd K = gram(spec, points_, w);
  chol_ = cholesky_with_jitter(std::move(K));
}

GaussianSampler::GaussianSampler(const CovarianceSpec& spec, const Grid& grid, const MultiIndex& w)
    : GaussianSampler(spec, grid.points(), w) {
  grid_ = grid;
}

Eigen::VectorXd GaussianSampler::draw_values(RngEngine& rng) const {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(static_cast<Eigen::Index>(points_.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
  return chol_ * z;
}

GridFunction GaussianSampler::draw(RngEngine& rng) const {
  if (!grid_) throw std::logic_error("sampler was built from a point list, not a grid");
  return {*grid_, draw_values(rng)};
}

GridFunction GaussianSampler::draw(const GridFunction& mean, RngEngine& rng) const {
  if (!grid_) throw std::logic_error("sampler was built from a point list, not a grid");
  if (!(mean.grid == *grid_)) throw std::invalid_argument("mean grid mismatch");
  return {*grid_, mean.values + draw_values(rng)};
}

GridFunction sample_exact(const CovarianceSpec& spec, const GridFunction& mean, RngEngine& rng) {
  GaussianSampler sampler(spec, mean.grid);
  return sampler.draw(mean, rng);
}

GridFunction sample_derivative(const CovarianceSpec& spec, const MultiIndex& w, const Grid& grid,
                               RngEngine& rng) {
  GaussianSampler sampler(spec, grid, w);
  return sampler.draw(rng);
}

KlTruncation::KlTruncation(EigenSystem sys, int level) : eigen(std::move(sys)), N(level) {
  if (N < 1 || N > eigen.rank) {
    throw std::invalid_argument("truncation level must be in [1, rank]");
  }
  xi = Eigen::VectorXd::Zero(N);
}

void KlTruncation::resample(RngEngine& rng) {
  std::normal_distribution<double> gauss;
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = gauss(rng);
}

GridFunction sample_kl(const KlTruncation& trunc, const GridFunction& mean) {
  if (!(mean.grid == trunc.eigen.grid)) throw std::invalid_argument("mean grid mismatch");
  Eigen::VectorXd scaled =
      trunc.eigen.eigenvalues.head(trunc.N).cwiseSqrt().cwiseProduct(trunc.xi);
  Eigen::VectorXd v = mean.values + trunc.eigen.eigenfunctions.leftCols(trunc.N) * scaled;
  return {mean.grid, std::move(v)};
}

double truncation_error(const EigenSystem& eigen, int N, std::size_t draws, RngEngine& rng,
                        double* se_out) {
  if (N < 0 || N >= eigen.rank) throw std::invalid_argument("tail level must be in [0, rank)");
  if (draws == 0) throw std::invalid_argument("draws must be positive");
  const int tail = eigen.rank - N;
  Eigen::VectorXd sqrt_vals = eigen.eigenvalues.segment(N, tail).cwiseSqrt();
  Eigen::MatrixXd basis = eigen.eigenfunctions.middleCols(N, tail);
  std::normal_distribution<double> gauss;
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd xi(tail);
  for (std::size_t d = 0; d < draws; ++d) {
    for (int i = 0; i < tail; ++i) xi[i] = gauss(rng);
    double sup = (basis * sqrt_vals.cwiseProduct(xi)).cwiseAbs().maxCoeff();
    double sq = sup * sup;
    sum += sq;
    sum_sq += sq * sq;
  }
  double mean = sum / static_cast<double>(draws);
  if (se_out) {
    double var = sum_sq / static_cast<double>(draws) - mean * mean;
    *se_out = std::sqrt(std::max(var, 0.0) / static_cast<double>(draws));
  }
  return mean;
}

std::vector<TailPoint> sup_tail_curve(const CovarianceSpec& spec, const MultiIndex& w,
                                      const Grid& grid, const std::vector<double>& thresholds,
                                      std::size_t draws, RngEngine& rng) {
  if (thresholds.empty()) throw std::invalid_argument("need at least one threshold");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) throw std::invalid_argument("thresholds must be positive");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("thresholds must be increasing");
    }
  }
  GaussianSampler sampler(spec, grid, w);
  std::vector<std::size_t> hits(thresholds.size(), 0);
  for (std::size_t d = 0; d < draws; ++d) {
    double sup = sampler.draw_values(rng).cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (sup > thresholds[k]) ++hits[k];
    }
  }
  std::vector<TailPoint> curve(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    curve[k] = {thresholds[k], static_cast<double>(hits[k]) / static_cast<double>(draws), hits[k]};
  }
  return curve;
}

TailFit fit_tail_curve(const std::vector<TailPoint>& curve, std::size_t min_hits) {
  std::vector<double> xs, ys;
  for (const TailPoint& pt : curve) {
    if (pt.hits >= min_hits && pt.frequency < 1.0) {
      xs.push_back(pt.threshold * pt.threshold);
      ys.push_back(std::log(pt.frequency));
    }
  }
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 3) throw std::runtime_error("tail fit needs at least 3 usable thresholds");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  TailFit fit;
  double slope = sxy / sxx;
  fit.c2 = -slope;
  fit.log_c1 = my - slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

}  // namespace gpbr
