#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gpbinreg/grid.hpp"

namespace gpbr {

/// Differentiation multi-index w = (w_1, ..., w_d); |w| = sum w_j.
struct MultiIndex {
  std::vector<int> orders;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> w);
  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }
  static MultiIndex unit(int dim, int axis);

  int dim() const { return static_cast<int>(orders.size()); }
  int total() const;
  bool is_zero() const { return total() == 0; }
};

/// Base covariance kernel sigma_0. Stateless, evaluated on already-scaled
/// arguments; closed-form mixed derivatives are required up to the order the
/// family supports.
class BaseKernel {
 public:
  virtual ~BaseKernel() = default;

  virtual std::string name() const = 0;

  /// sigma_0(u, v)
  virtual double evaluate(std::span<const double> u, std::span<const double> v) const = 0;

  /// D^w_u D^w_v sigma_0(u, v), derivative in both arguments componentwise.
  virtual double mixed_derivative(const MultiIndex& w, std::span<const double> u,
                                  std::span<const double> v) const = 0;

  /// D^w_u sigma_0(u, v), derivative in the first argument only.
  virtual double section_derivative(const MultiIndex& w, std::span<const double> u,
                                    std::span<const double> v) const = 0;

  /// Largest per-component derivative order available in closed form.
  virtual int max_derivative_order() const = 0;
};

/// Product squared-exponential kernel sigma_0(u, v) = exp(-sum_j (u_j - v_j)^2).
/// Smooth, so derivatives of any order are available; mixed derivatives come
/// from the Hermite identity d^n/dr^n e^{-r^2} = (-1)^n H_n(r) e^{-r^2}.
class SquaredExponentialKernel final : public BaseKernel {
 public:
  std::string name() const override { return "squared-exponential"; }
  double evaluate(std::span<const double> u, std::span<const double> v) const override;
  double mixed_derivative(const MultiIndex& w, std::span<const double> u,
                          std::span<const double> v) const override;
  double section_derivative(const MultiIndex& w, std::span<const double> u,
                            std::span<const double> v) const override;
  int max_derivative_order() const override { return std::numeric_limits<int>::max(); }
};

/// Looks a kernel family up by name ("squared-exponential" is built in).
std::shared_ptr<const BaseKernel> make_kernel(const std::string& family);

/// Registers an additional family; later registrations win on name clashes.
void register_kernel(const std::string& family,
                     std::shared_ptr<const BaseKernel> (*factory)());

/// Scaled covariance sigma(s, t) = tau^{-1} sigma_0(lambda s, lambda t).
struct CovarianceSpec {
  std::shared_ptr<const BaseKernel> base;
  double tau = 1.0;
  double lambda = 1.0;
  int dim = 1;

  CovarianceSpec() : base(make_kernel("squared-exponential")) {}
  CovarianceSpec(std::shared_ptr<const BaseKernel> kernel, double tau_, double lambda_, int dim_);
  CovarianceSpec(const std::string& family, double tau_, double lambda_, int dim_)
      : CovarianceSpec(make_kernel(family), tau_, lambda_, dim_) {}

  double evaluate(std::span<const double> s, std::span<const double> t) const;

  /// D^w_s D^w_t sigma(s, t) = tau^{-1} lambda^{2|w|} (D^w D^w sigma_0)(lambda s, lambda t).
  double derivative(const MultiIndex& w, std::span<const double> s, std::span<const double> t) const;

  CovarianceSpec with(double tau_, double lambda_) const {
    return CovarianceSpec(base, tau_, lambda_, dim);
  }
};

/// Gram matrix of D^w D^w sigma over a point set; throws on duplicate points.
Eigen::MatrixXd gram(const CovarianceSpec& spec, std::span<const Point> points,
                     const MultiIndex& w);
Eigen::MatrixXd gram(const CovarianceSpec& spec, const Grid& grid, const MultiIndex& w);

inline Eigen::MatrixXd gram(const CovarianceSpec& spec, const Grid& grid) {
  return gram(spec, grid, MultiIndex::zero(spec.dim));
}

/// Discrete Mercer eigensystem of the weighted kernel operator on a grid.
struct EigenSystem {
  Grid grid;
  Eigen::VectorXd eigenvalues;     // nonincreasing, clamped at zero
  Eigen::MatrixXd eigenfunctions;  // column k = psi_k on the grid, weighted-orthonormal
  Eigen::VectorXd weights;         // quadrature weights
  int rank = 0;                    // eigenpairs above the retention threshold

  /// Nystrom extension of psi_k to an off-grid point.
  double extend(const CovarianceSpec& spec, int k, std::span<const double> x) const;

  /// sum_{k<N} lambda_k psi_k(x)^2, the truncated diagonal reconstruction.
  double diag_reconstruction(const CovarianceSpec& spec, std::span<const double> x, int level) const;
};

/// Grid-based (Nystrom) eigendecomposition with uniform cell weights.
EigenSystem mercer_decompose(const CovarianceSpec& spec, const Grid& grid);

/// Symmetric factor of K + jitter, escalating jitter from 1e-10 to 1e-6 of the
/// mean diagonal; throws "kernel too ill-conditioned" when all levels fail.
Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd K);

}  // namespace gpbr
