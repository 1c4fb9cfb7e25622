#include "gpbinreg/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpbr {

namespace {

// 4-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
constexpr double kGlWeight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};

double integrate_cell(const ScalarFunction& h, double a, double b) {
  // Four Gauss-Legendre panels per cell: 16 nodes, exact through degree 7.
  double acc = 0.0;
  const double w = (b - a) / 4.0;
  for (int panel = 0; panel < 4; ++panel) {
    const double lo = a + w * panel;
    const double mid = lo + 0.5 * w;
    for (int i = 0; i < 4; ++i) acc += kGlWeight[i] * h(mid + 0.5 * w * kGlNode[i]);
  }
  return acc * 0.5 * w;
}

}  // namespace

BernsteinOperator::BernsteinOperator(const ScalarFunction& h, int k) : k_(k) {
  if (k < 1) throw std::invalid_argument("operator order must be at least 1");
  if (!h) throw std::invalid_argument("operator needs a function");
  integrals_.resize(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) {
    integrals_[static_cast<std::size_t>(j - 1)] =
        integrate_cell(h, static_cast<double>(j - 1) / k, static_cast<double>(j) / k);
  }
}

double BernsteinOperator::operator()(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("operator argument must lie in [0,1]");
  if (x == 0.0) return k_ * integrals_.front();
  if (x == 1.0) return k_ * integrals_.back();
  const double lx = std::log(x);
  const double l1x = std::log1p(-x);
  const double lgk = std::lgamma(static_cast<double>(k_));
  double acc = 0.0;
  for (int j = 1; j <= k_; ++j) {
    double lw = lgk - std::lgamma(static_cast<double>(j)) -
                std::lgamma(static_cast<double>(k_ - j + 1)) + (j - 1) * lx + (k_ - j) * l1x;
    acc += integrals_[static_cast<std::size_t>(j - 1)] * std::exp(lw);
  }
  return k_ * acc;
}

double bernstein(const ScalarFunction& h, int k, double x) {
  return BernsteinOperator(h, k)(x);
}

BernsteinErrorReport bernstein_error(const ScalarFunction& h, const ScalarFunction& h_second,
                                     int k, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("error grid too small");
  BernsteinOperator op(h, k);
  double sup_err = 0.0, sup_h2 = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double x = static_cast<double>(i) / (grid_points - 1);
    sup_err = std::max(sup_err, std::abs(h(x) - op(x)));
    sup_h2 = std::max(sup_h2, std::abs(h_second(x)));
  }
  BernsteinErrorReport out;
  out.sup_error = sup_err;
  if (sup_h2 > 1e-12) out.fitted_A = sup_err * k / sup_h2;
  return out;
}

std::vector<Interval> b_p_intervals(const ScalarFunction& p, const ScalarFunction& p0, int k_n,
                                    double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  BernsteinOperator bp(p, k_n), bp0(p0, k_n);
  auto excess = [&](double t) { return std::abs(bp(t) - bp0(t)) - 2.0 * eps; };

  const int scan = 16 * k_n;
  auto refine = [&](double lo, double hi) {
    // excess changes sign on [lo, hi]; bisect to 1e-10.
    double flo = excess(lo);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
      double mid = 0.5 * (lo + hi);
      double fmid = excess(mid);
      if ((flo > 0.0) == (fmid > 0.0)) {
        lo = mid;
        flo = fmid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  std::vector<Interval> out;
  double prev_t = 0.0;
  double prev_f = excess(0.0);
  bool inside = prev_f > 0.0;
  double start = 0.0;
  for (int i = 1; i <= scan; ++i) {
    double t = static_cast<double>(i) / scan;
    double f = excess(t);
    if ((f > 0.0) != (prev_f > 0.0)) {
      double cross = refine(prev_t, t);
      if (inside) {
        out.emplace_back(start, cross);
        inside = false;
      } else {
        start = cross;
        inside = true;
      }
    }
    prev_t = t;
    prev_f = f;
  }
  if (inside) out.emplace_back(start, 1.0);
  return out;
}

DesignSpacing::DesignSpacing(std::vector<double> sorted_x) : x(std::move(sorted_x)) {
  if (x.empty()) throw std::invalid_argument("design must be nonempty");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] < x[i - 1]) throw std::invalid_argument("design must be sorted ascending");
    spacing.push_back(x[i] - x[i - 1]);
  }
}

SpacingAudit spacing_audit(const DesignSpacing& design, double K1, double delta,
                           const std::vector<Interval>& intervals) {
  if (!(K1 > 0.0)) throw std::invalid_argument("K1 must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  const double cutoff = K1 / static_cast<double>(design.x.size());
  SpacingAudit out;
  for (double s : design.spacing) {
    if (s > cutoff) out.sparse_mass += s;
  }
  out.satisfied = out.sparse_mass <= delta;

  if (!intervals.empty()) {
    std::vector<bool> marked(design.x.size(), false);
    for (std::size_t i = 0; i < design.spacing.size(); ++i) {
      if (design.spacing[i] > cutoff) continue;
      const double a = design.x[i], b = design.x[i + 1];
      for (const Interval& iv : intervals) {
        if (a >= iv.first && b <= iv.second) {
          marked[i] = true;
          marked[i + 1] = true;
          break;
        }
      }
    }
    out.covered_points = static_cast<int>(std::count(marked.begin(), marked.end(), true));
  }
  return out;
}

}  // namespace gpbr
