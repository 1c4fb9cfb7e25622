#include "gpbinreg/kernels.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gpbr {

MultiIndex::MultiIndex(std::vector<int> w) : orders(std::move(w)) {
  if (orders.empty()) throw std::invalid_argument("multi-index must have at least one component");
  for (int o : orders) {
    if (o < 0) throw std::invalid_argument("multi-index components must be nonnegative");
  }
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  std::vector<int> w(dim, 0);
  w.at(axis) = 1;
  return MultiIndex(std::move(w));
}

int MultiIndex::total() const {
  int s = 0;
  for (int o : orders) s += o;
  return s;
}

namespace {

void check_args(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty()) {
    throw std::invalid_argument("kernel arguments must share a positive dimension");
  }
  for (double x : u) {
    if (!std::isfinite(x)) throw std::invalid_argument("kernel argument is not finite");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("kernel argument is not finite");
  }
}

// Physicists' Hermite polynomial H_n(r) by the standard recurrence.
double hermite(int n, double r) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * r;
  for (int k = 1; k < n; ++k) {
    double h2 = 2.0 * r * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace

double SquaredExponentialKernel::evaluate(std::span<const double> u,
                                          std::span<const double> v) const {
  check_args(u, v);
  double q = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    double r = u[j] - v[j];
    q += r * r;
  }
  return std::exp(-q);
}

// For f(r) = e^{-r^2}: d^n/dr^n f = (-1)^n H_n(r) f(r).  A mixed derivative
// D^w_u D^w_v of the product factor e^{-(u_j - v_j)^2} differentiates 2w_j
// times in r = u_j - v_j with sign (-1)^{w_j}.
double SquaredExponentialKernel::mixed_derivative(const MultiIndex& w, std::span<const double> u,
                                                  std::span<const double> v) const {
  check_args(u, v);
  if (static_cast<size_t>(w.dim()) != u.size()) {
    throw std::invalid_argument("multi-index dimension mismatch");
  }
  double out = 1.0;
  for (size_t j = 0; j < u.size(); ++j) {
    double r = u[j] - v[j];
    int wj = w.orders[j];
    double f = std::exp(-r * r);
    if (wj == 0) {
      out *= f;
    } else {
      double sign = (wj % 2 == 0) ? 1.0 : -1.0;
      out *= sign * hermite(2 * wj, r) * f;
    }
  }
  return out;
}

double SquaredExponentialKernel::section_derivative(const MultiIndex& w, std::span<const double> u,
                                                    std::span<const double> v) const {
  check_args(u, v);
  if (static_cast<size_t>(w.dim()) != u.size()) {
    throw std::invalid_argument("multi-index dimension mismatch");
  }
  double out = 1.0;
  for (size_t j = 0; j < u.size(); ++j) {
    double r = u[j] - v[j];
    int wj = w.orders[j];
    double f = std::exp(-r * r);
    if (wj == 0) {
      out *= f;
    } else {
      double sign = (wj % 2 == 0) ? 1.0 : -1.0;
      out *= sign * hermite(wj, r) * f;
    }
  }
  return out;
}

namespace {

using KernelFactory = std::shared_ptr<const BaseKernel> (*)();

std::map<std::string, KernelFactory>& kernel_registry() {
  static std::map<std::string, KernelFactory> reg = {
      {"squared-exponential", +[]() -> std::shared_ptr<const BaseKernel> {
         return std::make_shared<SquaredExponentialKernel>();
       }},
  };
  return reg;
}

}  // namespace

std::shared_ptr<const BaseKernel> make_kernel(const std::string& family) {
  auto& reg = kernel_registry();
  auto it = reg.find(family);
  if (it == reg.end()) throw std::invalid_argument("unknown kernel family: " + family);
  return it->second();
}

void register_kernel(const std::string& family, KernelFactory factory) {
  kernel_registry()[family] = factory;
}

CovarianceSpec::CovarianceSpec(std::shared_ptr<const BaseKernel> kernel, double tau_,
                               double lambda_, int dim_)
    : base(std::move(kernel)), tau(tau_), lambda(lambda_), dim(dim_) {
  if (!base) throw std::invalid_argument("covariance needs a base kernel");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
}

namespace {

std::vector<double> scale(std::span<const double> x, double lambda) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= lambda;
  return out;
}

}  // namespace

double CovarianceSpec::evaluate(std::span<const double> s, std::span<const double> t) const {
  if (s.size() != static_cast<size_t>(dim)) throw std::invalid_argument("point dimension mismatch");
  return base->evaluate(scale(s, lambda), scale(t, lambda)) / tau;
}

double CovarianceSpec::derivative(const MultiIndex& w, std::span<const double> s,
                                  std::span<const double> t) const {
  if (s.size() != static_cast<size_t>(dim)) throw std::invalid_argument("point dimension mismatch");
  if (w.dim() != dim) throw std::invalid_argument("multi-index dimension mismatch");
  int order = 0;
  for (int o : w.orders) order = std::max(order, o);
  if (order > base->max_derivative_order()) {
    throw std::runtime_error("derivative order unavailable for kernel family " + base->name());
  }
  double scale_factor = std::pow(lambda, 2.0 * w.total()) / tau;
  return scale_factor * base->mixed_derivative(w, scale(s, lambda), scale(t, lambda));
}

namespace {

// Duplicate points make the Gram matrix exactly singular, which surfaces later
// as a confusing factorization failure; reject them up front.
void check_distinct(std::span<const Point> points) {
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = i + 1; j < points.size(); ++j) {
      double d = 0.0;
      for (size_t k = 0; k < points[i].size(); ++k) {
        d = std::max(d, std::abs(points[i][k] - points[j][k]));
      }
      if (d < 1e-14) {
        std::ostringstream msg;
        msg << "singular grid: points " << i << " and " << j << " coincide";
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd gram(const CovarianceSpec& spec, std::span<const Point> points,
                     const MultiIndex& w) {
  if (points.empty()) throw std::invalid_argument("gram needs at least one point");
  for (const Point& p : points) {
    if (p.size() != static_cast<size_t>(spec.dim)) {
      throw std::invalid_argument("point dimension mismatch");
    }
  }
  check_distinct(points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v = spec.derivative(w, points[i], points[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd gram(const CovarianceSpec& spec, const Grid& grid, const MultiIndex& w) {
  return gram(spec, std::span<const Point>(grid.points()), w);
}

double EigenSystem::extend(const CovarianceSpec& spec, int k, std::span<const double> x) const {
  if (k < 0 || k >= eigenvalues.size()) throw std::out_of_range("eigenpair index");
  if (eigenvalues[k] <= 0.0) throw std::invalid_argument("cannot extend a null eigenfunction");
  const auto& pts = grid.points();
  double acc = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    acc += weights[static_cast<Eigen::Index>(i)] *
           spec.evaluate(x, pts[i]) * eigenfunctions(static_cast<Eigen::Index>(i), k);
  }
  return acc / eigenvalues[k];
}

double EigenSystem::diag_reconstruction(const CovarianceSpec& spec, std::span<const double> x,
                                        int level) const {
  if (level < 0 || level > eigenvalues.size()) throw std::out_of_range("truncation level");
  double acc = 0.0;
  for (int k = 0; k < level; ++k) {
    if (eigenvalues[k] <= 0.0) break;
    double psi = extend(spec, k, x);
    acc += eigenvalues[k] * psi * psi;
  }
  return acc;
}

EigenSystem mercer_decompose(const CovarianceSpec& spec, const Grid& grid) {
  Eigen::MatrixXd K = gram(spec, grid);
  const Eigen::Index n = K.rows();
  double h = grid.cell_weight();
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, h);

  // Symmetrized weighted operator B = D^{1/2} K D^{1/2}; with uniform weights
  // this is just h * K, but the general form keeps the construction honest.
  Eigen::MatrixXd B = K * h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("decomposition failed: eigensolver did not converge");
  }

  // Eigen returns ascending order; flip to nonincreasing.
  Eigen::VectorXd vals = solver.eigenvalues().reverse();
  Eigen::MatrixXd vecs = solver.eigenvectors().rowwise().reverse();

  double tol = 1e-8 * std::max(B.trace(), 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (vals[k] < -tol) {
      std::ostringstream msg;
      msg << "decomposition failed: eigenvalue " << vals[k]
          << " below tolerance " << -tol;
      throw std::runtime_error(msg.str());
    }
    if (vals[k] < 0.0) vals[k] = 0.0;
  }

  EigenSystem sys;
  sys.grid = grid;
  sys.eigenvalues = vals;
  sys.weights = weights;
  // psi_k(t_i) = U_ik / sqrt(h_i); orthonormal in the weighted inner product.
  sys.eigenfunctions = vecs / std::sqrt(h);
  double lead = vals.size() > 0 ? vals[0] : 0.0;
  sys.rank = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (vals[k] > 1e-12 * lead) ++sys.rank;
  }
  return sys;
}

Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd K) {
  if (K.rows() != K.cols() || K.rows() == 0) {
    throw std::invalid_argument("cholesky needs a nonempty square matrix");
  }
  const Eigen::Index n = K.rows();
  double scale = std::max(K.trace() / static_cast<double>(n), 0.0);
  const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6};
  for (double level : ladder) {
    Eigen::MatrixXd shifted = K;
    if (level > 0.0) shifted.diagonal().array() += level * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
  }
  throw std::runtime_error("kernel too ill-conditioned: jitter ladder exhausted");
}

}  // namespace gpbr
