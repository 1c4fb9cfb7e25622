#include "gpbinreg/rkhs.hpp"

#include <cmath>
#include <stdexcept>

namespace gpbr {

RkhsElement::RkhsElement(std::shared_ptr<const BaseKernel> kernel, double lambda_,
                         std::vector<Point> nodes_, Eigen::VectorXd coeffs)
    : base(std::move(kernel)), lambda(lambda_), nodes(std::move(nodes_)),
      coefficients(std::move(coeffs)) {
  if (!base) throw std::invalid_argument("element needs a base kernel");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  if (nodes.empty()) throw std::invalid_argument("element needs at least one node");
  if (coefficients.size() != static_cast<Eigen::Index>(nodes.size())) {
    throw std::invalid_argument("coefficient count must match node count");
  }
  const std::size_t d = nodes.front().size();
  for (const Point& t : nodes) {
    if (t.size() != d || d == 0) throw std::invalid_argument("nodes must share a positive dimension");
    for (double v : t) {
      if (!std::isfinite(v)) throw std::invalid_argument("node coordinate is not finite");
    }
  }
  if (!coefficients.allFinite()) throw std::invalid_argument("coefficients must be finite");
}

RkhsElement RkhsElement::zero(int dim) {
  return RkhsElement(make_kernel("squared-exponential"), 1.0, {Point(dim, 0.0)},
                     Eigen::VectorXd::Zero(1));
}

namespace {

std::vector<double> scale_point(std::span<const double> x, double lambda) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= lambda;
  return out;
}

}  // namespace

double RkhsElement::evaluate(std::span<const double> x) const {
  if (x.size() != nodes.front().size()) throw std::invalid_argument("point dimension mismatch");
  std::vector<double> sx = scale_point(x, lambda);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += coefficients[static_cast<Eigen::Index>(i)] *
           base->evaluate(sx, scale_point(nodes[i], lambda));
  }
  return acc;
}

double RkhsElement::derivative(const MultiIndex& w, std::span<const double> x) const {
  if (x.size() != nodes.front().size()) throw std::invalid_argument("point dimension mismatch");
  if (w.dim() != dim()) throw std::invalid_argument("multi-index dimension mismatch");
  int order = 0;
  for (int o : w.orders) order = std::max(order, o);
  if (order > base->max_derivative_order()) {
    throw std::runtime_error("derivative order unavailable for kernel family " + base->name());
  }
  std::vector<double> sx = scale_point(x, lambda);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += coefficients[static_cast<Eigen::Index>(i)] *
           base->section_derivative(w, sx, scale_point(nodes[i], lambda));
  }
  return std::pow(lambda, static_cast<double>(w.total())) * acc;
}

GridFunction RkhsElement::on_grid(const Grid& g) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = evaluate(g.point(i));
  }
  return {g, std::move(v)};
}

GridFunction RkhsElement::derivative_on_grid(const MultiIndex& w, const Grid& g) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = derivative(w, g.point(i));
  }
  return {g, std::move(v)};
}

double rkhs_norm_sq(const RkhsElement& e) {
  // Pool coefficients of coincident nodes so the Gram stays nonsingular.
  std::vector<Point> distinct;
  std::vector<double> pooled;
  for (std::size_t i = 0; i < e.nodes.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < distinct.size(); ++j) {
      double gap = 0.0;
      for (std::size_t k = 0; k < distinct[j].size(); ++k) {
        gap = std::max(gap, std::abs(e.lambda * (distinct[j][k] - e.nodes[i][k])));
      }
      if (gap < 1e-12) {
        pooled[j] += e.coefficients[static_cast<Eigen::Index>(i)];
        merged = true;
        break;
      }
    }
    if (!merged) {
      distinct.push_back(e.nodes[i]);
      pooled.push_back(e.coefficients[static_cast<Eigen::Index>(i)]);
    }
  }
  const auto k = static_cast<Eigen::Index>(distinct.size());
  Eigen::VectorXd a(k);
  for (Eigen::Index i = 0; i < k; ++i) a[i] = pooled[static_cast<std::size_t>(i)];
  Eigen::MatrixXd K(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    std::vector<double> si = scale_point(distinct[static_cast<std::size_t>(i)], e.lambda);
    for (Eigen::Index j = i; j < k; ++j) {
      double v = e.base->evaluate(si, scale_point(distinct[static_cast<std::size_t>(j)], e.lambda));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  double q = a.dot(K * a);
  return std::max(q, 0.0);
}

ProjectionResult project_to_span(const GridFunction& target, std::vector<Point> nodes,
                                 double lambda, double ridge) {
  if (nodes.empty()) throw std::invalid_argument("projection needs at least one node");
  if (ridge < 0.0) throw std::invalid_argument("ridge must be nonnegative");
  auto base = make_kernel("squared-exponential");
  const auto m = static_cast<Eigen::Index>(target.grid.size());
  const auto k = static_cast<Eigen::Index>(nodes.size());

  Eigen::MatrixXd design(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> sx = scale_point(target.grid.point(static_cast<std::size_t>(i)), lambda);
    for (Eigen::Index j = 0; j < k; ++j) {
      design(i, j) = base->evaluate(sx, scale_point(nodes[static_cast<std::size_t>(j)], lambda));
    }
  }

  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;
  if (ridge > 0.0) {
    // Augmented least squares: [design; sqrt(ridge) R] a ~ [y; 0], K = R^T R.
    Eigen::MatrixXd K(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      std::vector<double> si = scale_point(nodes[static_cast<std::size_t>(i)], lambda);
      for (Eigen::Index j = i; j < k; ++j) {
        double v = base->evaluate(si, scale_point(nodes[static_cast<std::size_t>(j)], lambda));
        K(i, j) = v;
        K(j, i) = v;
      }
    }
    Eigen::MatrixXd R = cholesky_with_jitter(K).transpose();
    lhs.resize(m + k, k);
    lhs.topRows(m) = design;
    lhs.bottomRows(k) = std::sqrt(ridge) * R;
    rhs = Eigen::VectorXd::Zero(m + k);
    rhs.head(m) = target.values;
  } else {
    lhs = design;
    rhs = target.values;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (ridge == 0.0 && svd.rank() < k) {
    throw std::runtime_error("increase ridge: node system is numerically rank-deficient");
  }
  Eigen::VectorXd a = svd.solve(rhs);
  if (!a.allFinite()) {
    throw std::runtime_error("increase ridge: projection solve produced non-finite coefficients");
  }

  ProjectionResult out{RkhsElement(base, lambda, std::move(nodes), a), 0.0, ridge};
  out.sup_error = (design * a - target.values).cwiseAbs().maxCoeff();
  return out;
}

SmallBallEstimate small_ball_probability(const CovarianceSpec& spec, const RkhsElement& w0,
                                         double eps, const Grid& grid, std::size_t draws,
                                         RngEngine& rng) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (draws == 0) throw std::invalid_argument("draws must be positive");
  Eigen::VectorXd center = w0.on_grid(grid).values;
  GaussianSampler sampler(spec, grid);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    double sup = (sampler.draw_values(rng) - center).cwiseAbs().maxCoeff();
    if (sup < eps) ++hits;
  }
  SmallBallEstimate est;
  est.hits = hits;
  est.draws = draws;
  const double n = static_cast<double>(draws);
  const double phat = static_cast<double>(hits) / n;
  est.estimate = phat;
  // Wilson score interval at z = 1.96.
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double mid = phat + z2 / (2.0 * n);
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  est.wilson_lo = (mid - half) / denom;
  est.wilson_hi = (mid + half) / denom;
  return est;
}

}  // namespace gpbr
