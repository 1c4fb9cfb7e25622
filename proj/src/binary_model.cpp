#include "gpbinreg/binary_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gpbr {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

double probit_forward(double u) { return 0.5 * std::erfc(-u / kSqrt2); }

// Rational approximation for the normal quantile (relative error ~1e-9),
// then one Halley step on Phi(x) - p pushes it to full double precision.
double probit_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse link needs p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = probit_forward(x) - p;
  double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double logistic_forward(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  double z = std::exp(u);
  return z / (1.0 + z);
}

}  // namespace

LinkFunction LinkFunction::by_name(const std::string& name) {
  if (name == "probit") return probit();
  if (name == "logistic") return logistic();
  throw std::invalid_argument("unknown link family: " + name);
}

std::string LinkFunction::name() const {
  return family_ == Family::probit ? "probit" : "logistic";
}

double LinkFunction::forward(double u) const {
  if (!std::isfinite(u)) throw std::domain_error("link argument is not finite");
  return family_ == Family::probit ? probit_forward(u) : logistic_forward(u);
}

double LinkFunction::inverse(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse link needs p in (0,1)");
  if (family_ == Family::probit) return probit_inverse(p);
  return std::log(p / (1.0 - p));
}

double LinkFunction::lipschitz() const {
  return family_ == Family::probit ? 1.0 / kSqrt2Pi : 0.25;
}

Point DesignSpec::draw_q(RngEngine& rng) const {
  Point p(dim);
  if (q == CovariateDistribution::uniform) {
    std::uniform_real_distribution<double> unif(lo, hi);
    for (double& v : p) v = unif(rng);
  } else {
    // Beta(2, 5) per coordinate, rescaled to [lo, hi].
    std::gamma_distribution<double> g2(2.0, 1.0), g5(5.0, 1.0);
    for (double& v : p) {
      double x = g2(rng);
      double y = g5(rng);
      v = lo + (hi - lo) * x / (x + y);
    }
  }
  return p;
}

std::vector<Point> DesignSpec::make(std::size_t n, RngEngine& rng) const {
  if (n == 0) throw std::invalid_argument("design needs n >= 1");
  std::vector<Point> pts;
  pts.reserve(n);
  switch (kind) {
    case DesignKind::random_q:
      for (std::size_t i = 0; i < n; ++i) pts.push_back(draw_q(rng));
      break;
    case DesignKind::fixed_grid: {
      if (dim != 1) throw std::invalid_argument("fixed-grid design is one-dimensional");
      const double step = (hi - lo) / static_cast<double>(n + 1);
      for (std::size_t i = 1; i <= n; ++i) pts.push_back({lo + step * static_cast<double>(i)});
      break;
    }
    case DesignKind::fixed_custom:
      if (custom.size() != n) throw std::invalid_argument("custom design size mismatch");
      pts = custom;
      break;
  }
  if (sort_covariates) {
    if (dim != 1) throw std::invalid_argument("sorting applies to one-dimensional designs");
    std::sort(pts.begin(), pts.end(),
              [](const Point& a, const Point& b) { return a[0] < b[0]; });
  }
  return pts;
}

RealFunction response_function(const RkhsElement& eta0, const LinkFunction& link) {
  return [eta0, link](const Point& x) { return link.forward(eta0.evaluate(x)); };
}

Dataset simulate(const RealFunction& p0, const DesignSpec& design, std::size_t n, RngEngine& rng) {
  Dataset data;
  data.design = design.kind;
  data.x = design.make(n, rng);
  data.y.reserve(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const Point& xi : data.x) {
    double p = p0(xi);
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("response probability must lie in (0,1)");
    }
    data.y.push_back(unif(rng) < p ? 1 : 0);
  }
  return data;
}

void Dataset::to_csv(std::ostream& os) const {
  const int d = dim();
  for (int j = 0; j < d; ++j) os << "x" << (j + 1) << ",";
  os << "y\n";
  char buf[32];
  for (std::size_t i = 0; i < n(); ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[i][static_cast<std::size_t>(j)]);
      os << buf << ",";
    }
    os << y[i] << "\n";
  }
}

Dataset Dataset::from_csv(std::istream& is) {
  Dataset data;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset csv: missing header");
  int d = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.empty() || cols.back() != "y") {
      throw std::runtime_error("dataset csv: last column must be y");
    }
    d = static_cast<int>(cols.size()) - 1;
    if (d < 1) throw std::runtime_error("dataset csv: needs at least one covariate column");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    Point p;
    for (int j = 0; j < d; ++j) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("dataset csv: short row");
      p.push_back(std::stod(cell));
    }
    if (!std::getline(row, cell, ',')) throw std::runtime_error("dataset csv: missing response");
    int yi = std::stoi(cell);
    if (yi != 0 && yi != 1) throw std::runtime_error("dataset csv: responses must be bits");
    data.x.push_back(std::move(p));
    data.y.push_back(yi);
  }
  return data;
}

double log_likelihood(const RealFunction& p, const Dataset& data) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double pi = clamp_prob(p(data.x[i]));
    acc += data.y[i] == 1 ? std::log(pi) : std::log1p(-pi);
  }
  return acc;
}

double log_likelihood(const GridFunction& p, const Dataset& data) {
  return log_likelihood(as_function(p), data);
}

L1Measure L1Measure::monte_carlo_q(const DesignSpec& q, std::size_t draws, RngEngine& rng) {
  if (draws == 0) throw std::invalid_argument("measure needs at least one draw");
  L1Measure m;
  m.kind = Kind::mc_q;
  m.points.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) m.points.push_back(q.draw_q(rng));
  m.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(draws),
                                        1.0 / static_cast<double>(draws));
  return m;
}

L1Measure L1Measure::empirical(const Dataset& data) {
  if (data.n() == 0) throw std::invalid_argument("empirical measure needs a nonempty design");
  L1Measure m;
  m.kind = Kind::empirical;
  m.points = data.x;
  m.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.n()),
                                        1.0 / static_cast<double>(data.n()));
  return m;
}

L1Measure L1Measure::lebesgue(const Grid& grid) {
  L1Measure m;
  m.kind = Kind::lebesgue;
  m.points = grid.points();
  m.weights = grid.trapezoid_weights();
  return m;
}

double l1_distance(const RealFunction& p, const RealFunction& p0, const L1Measure& measure) {
  if (measure.points.empty()) throw std::invalid_argument("measure has no support points");
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.points.size(); ++i) {
    acc += measure.weights[static_cast<Eigen::Index>(i)] *
           std::abs(p(measure.points[i]) - p0(measure.points[i]));
  }
  return acc;
}

double kl_divergence(const RealFunction& p0, const RealFunction& p, const L1Measure& measure) {
  if (measure.points.empty()) throw std::invalid_argument("measure has no support points");
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.points.size(); ++i) {
    double a = clamp_prob(p0(measure.points[i]));
    double b = clamp_prob(p(measure.points[i]));
    acc += measure.weights[static_cast<Eigen::Index>(i)] *
           (a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b)));
  }
  return std::max(acc, 0.0);
}

double fit_quadratic_kl_constant(double eps0, int m, int grid_n) {
  if (!(eps0 > 0.0 && eps0 < 0.5)) throw std::invalid_argument("eps0 must be in (0, 0.5)");
  if (m != 1 && m != 2) throw std::invalid_argument("only m = 1, 2 are defined");
  if (grid_n < 2) throw std::invalid_argument("grid too small");
  double best = 0.0;
  const double step = (1.0 - 2.0 * eps0) / static_cast<double>(grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    double a = eps0 + step * i;
    // Diagonal limit: 1/(2a(1-a)) for m=1, 1/(a(1-a)) for m=2.
    double diag = (m == 1 ? 0.5 : 1.0) / (a * (1.0 - a));
    best = std::max(best, diag);
    for (int j = 0; j < grid_n; ++j) {
      if (j == i) continue;
      double b = eps0 + step * j;
      double l1 = std::log(a / b);
      double l2 = std::log((1.0 - a) / (1.0 - b));
      double num = m == 1 ? a * l1 + (1.0 - a) * l2 : a * l1 * l1 + (1.0 - a) * l2 * l2;
      best = std::max(best, num / ((a - b) * (a - b)));
    }
  }
  return best;
}

}  // namespace gpbr
