#include "gpbinreg/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gpbr {

SieveSpec SieveSpec::manual(int dim, int alpha, double M) {
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
  if (alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
  if (!(M >= 0.0)) throw std::invalid_argument("M must be nonnegative");
  SieveSpec s;
  s.dim = dim;
  s.alpha = alpha;
  s.M = M;
  return s;
}

SieveSpec SieveSpec::from_growth(double n, int dim, int alpha, double r, double s, double b1) {
  if (!(n > 0.0)) throw std::invalid_argument("n must be positive");
  if (!(r > 0.0) || !(s > 0.0)) throw std::invalid_argument("r and s must be positive");
  if (!(b1 > 0.0)) throw std::invalid_argument("b1 must be positive");
  SieveSpec spec = manual(dim, alpha, 0.0);
  spec.n = n;
  spec.tau_n = std::pow(n, -1.0 / r);
  spec.lambda_n = std::pow(n, 1.0 / s);
  spec.M = std::sqrt(b1 * n / spec.tau_n * std::pow(spec.lambda_n, 2.0 * alpha));
  return spec;
}

namespace {

// Central difference stencil for d^k/dx^k, built by composing the elementary
// first- and second-difference stencils; half-width is (k+1)/2.
std::vector<double> central_stencil(int order) {
  std::vector<double> s{1.0};
  auto convolve = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  };
  const std::vector<double> first{-0.5, 0.0, 0.5};
  const std::vector<double> second{1.0, -2.0, 1.0};
  int k = order;
  if (k % 2 == 1) {
    s = convolve(s, first);
    k -= 1;
  }
  for (int i = 0; i < k / 2; ++i) s = convolve(s, second);
  return s;
}

void enumerate_multi_indices(int dim, int max_total, std::vector<MultiIndex>& out) {
  std::vector<int> w(dim, 0);
  while (true) {
    int total = 0;
    for (int v : w) total += v;
    if (total <= max_total) out.push_back(MultiIndex(w));
    int j = dim - 1;
    while (j >= 0) {
      if (++w[static_cast<std::size_t>(j)] <= max_total) break;
      w[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
}

}  // namespace

SieveMembership sieve_member(const GridFunction& eta, const SieveSpec& spec) {
  const Grid& grid = eta.grid;
  if (grid.dim() != spec.dim) throw std::invalid_argument("grid dimension mismatch");
  if (grid.points_per_dim() < 4 * spec.alpha + 1) {
    std::ostringstream msg;
    msg << "grid too coarse for order-" << spec.alpha << " differencing; need at least "
        << 4 * spec.alpha + 1 << " points per dimension";
    throw std::invalid_argument(msg.str());
  }

  std::vector<MultiIndex> indices;
  enumerate_multi_indices(spec.dim, spec.alpha, indices);

  const int m = grid.points_per_dim();
  const double h = grid.step();
  SieveMembership out;
  out.member = true;

  for (const MultiIndex& w : indices) {
    std::vector<std::vector<double>> stencils;
    std::vector<int> halfw;
    double hscale = 1.0;
    for (int j = 0; j < spec.dim; ++j) {
      stencils.push_back(central_stencil(w.orders[static_cast<std::size_t>(j)]));
      halfw.push_back(static_cast<int>(stencils.back().size()) / 2);
      hscale *= std::pow(h, w.orders[static_cast<std::size_t>(j)]);
    }

    double sup = 0.0;
    std::vector<int> digit(spec.dim, 0);
    for (int j = 0; j < spec.dim; ++j) digit[static_cast<std::size_t>(j)] = halfw[static_cast<std::size_t>(j)];
    // Walk interior points where every axis stencil fits.
    bool done = false;
    while (!done) {
      // Tensor-apply the stencil at this point.
      std::vector<int> off(spec.dim, 0);
      double acc = 0.0;
      bool inner_done = false;
      while (!inner_done) {
        double coeff = 1.0;
        std::size_t flat = 0;
        for (int j = 0; j < spec.dim; ++j) {
          const auto& st = stencils[static_cast<std::size_t>(j)];
          int pos = digit[static_cast<std::size_t>(j)] + off[static_cast<std::size_t>(j)] -
                    halfw[static_cast<std::size_t>(j)];
          coeff *= st[static_cast<std::size_t>(off[static_cast<std::size_t>(j)])];
          flat = flat * static_cast<std::size_t>(m) + static_cast<std::size_t>(pos);
        }
        if (coeff != 0.0) acc += coeff * eta.values[static_cast<Eigen::Index>(flat)];
        int j = spec.dim - 1;
        while (j >= 0) {
          if (++off[static_cast<std::size_t>(j)] <
              static_cast<int>(stencils[static_cast<std::size_t>(j)].size())) {
            break;
          }
          off[static_cast<std::size_t>(j)] = 0;
          --j;
        }
        if (j < 0) inner_done = true;
      }
      sup = std::max(sup, std::abs(acc / hscale));

      int j = spec.dim - 1;
      while (j >= 0) {
        if (++digit[static_cast<std::size_t>(j)] < m - halfw[static_cast<std::size_t>(j)]) break;
        digit[static_cast<std::size_t>(j)] = halfw[static_cast<std::size_t>(j)];
        --j;
      }
      if (j < 0) done = true;
    }

    out.derivative_norms.emplace_back(w, sup);
    if (!(sup < spec.M)) out.member = false;
  }
  return out;
}

GrowthCheck assumption_g_check(int d, int alpha, double r, double s) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (!(r > 0.0) || !(s > 0.0)) throw std::invalid_argument("r and s must be positive");
  GrowthCheck out;
  if (s <= static_cast<double>(d)) {
    out.feasible = false;
    out.alpha_bound = std::numeric_limits<double>::infinity();
    out.note = "bandwidth tail exponent s must exceed the dimension d; "
               "no smoothness level can satisfy the growth schedule otherwise";
    return out;
  }
  out.alpha_bound = (1.0 + 1.0 / r) / (2.0 * (1.0 / d - 1.0 / s));
  out.feasible = static_cast<double>(alpha) >= out.alpha_bound;
  return out;
}

CoverResult covering_number(const std::vector<Eigen::VectorXd>& sample, double eps) {
  if (sample.empty()) throw std::invalid_argument("covering needs a nonempty sample");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const std::size_t S = sample.size();
  const Eigen::Index G = sample.front().size();
  for (const auto& f : sample) {
    if (f.size() != G) throw std::invalid_argument("sample functions live on different grids");
  }
  std::vector<bool> covered(S, false);
  CoverResult out;
  for (std::size_t c = 0; c < S; ++c) {
    if (covered[c]) continue;
    out.centers.push_back(static_cast<int>(c));
    for (std::size_t j = c; j < S; ++j) {
      if (!covered[j] && (sample[j] - sample[c]).cwiseAbs().maxCoeff() <= eps) {
        covered[j] = true;
      }
    }
  }
  out.size = static_cast<int>(out.centers.size());
  return out;
}

GridFunction sample_smooth_class(const Grid& grid, double M, int levels, RngEngine& rng) {
  if (grid.dim() != 1) throw std::invalid_argument("smooth-class sampler is one-dimensional");
  if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
  // Cascade: level l has m_l bumps tiling the domain, D_l = cumulative count.
  static constexpr int kCumulative[] = {2, 4, 8, 14, 26};
  static constexpr int kMaxLevels = 5;
  if (levels < 1 || levels > kMaxLevels) throw std::invalid_argument("levels must be in [1,5]");
  // Bump phi(u) = 16 u^2 (1-u)^2 on [0,1]: sup|phi| = 1, sup|phi''| = 32.
  auto phi = [](double u) { return u <= 0.0 || u >= 1.0 ? 0.0 : 16.0 * u * u * (1.0 - u) * (1.0 - u); };
  const double span = grid.hi() - grid.lo();
  // Amplitude a_l = A / D_l^2 with A set so the total curvature
  // sum_l 32 a_l (m_l / span)^2 lands at 0.9 M: every scale spends its share
  // of the second-derivative budget, which is what puts the family on the
  // covering growth curve of the full class.
  double budget = 0.0;
  for (int l = 0; l < levels; ++l) {
    const int m = kCumulative[l] - (l > 0 ? kCumulative[l - 1] : 0);
    const double d = static_cast<double>(kCumulative[l]);
    budget += (m / d) * (m / d);
  }
  const double scale = 0.9 * M * span * span / (32.0 * budget);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  std::bernoulli_distribution coin(0.5);
  for (int l = 0; l < levels; ++l) {
    const int bumps = kCumulative[l] - (l > 0 ? kCumulative[l - 1] : 0);
    const double d = static_cast<double>(kCumulative[l]);
    const double amp = scale / (d * d);
    const double width = span / bumps;
    for (int b = 0; b < bumps; ++b) {
      const double c = coin(rng) ? amp : -amp;
      const double left = grid.lo() + width * b;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double u = (grid.point(i)[0] - left) / width;
        if (u > 0.0 && u < 1.0) v[static_cast<Eigen::Index>(i)] += c * phi(u);
      }
    }
  }
  return {grid, std::move(v)};
}

namespace {

// Max over all derivative orders |w| <= alpha of the finite-difference sup
// norm; a draw fails the sieve at level M exactly when this reaches M.
double max_derivative_norm(const GridFunction& eta, int dim, int alpha) {
  SieveSpec probe = SieveSpec::manual(dim, alpha, std::numeric_limits<double>::infinity());
  SieveMembership mem = sieve_member(eta, probe);
  double worst = 0.0;
  for (const auto& [w, norm] : mem.derivative_norms) worst = std::max(worst, norm);
  return worst;
}

}  // namespace

ComplementCurve sieve_complement_curve(const PriorSpec& prior, const std::vector<SieveSpec>& specs,
                                       std::size_t draws, RngEngine& rng) {
  if (specs.empty()) throw std::invalid_argument("need at least one sieve");
  if (draws < 1000) throw std::invalid_argument("need at least 1000 draws");
  const int dim = prior.grid.dim();
  int alpha = specs.front().alpha;
  for (const SieveSpec& s : specs) {
    if (s.alpha != alpha || s.dim != dim) {
      throw std::invalid_argument("sieves must share alpha and dimension");
    }
  }

  std::vector<double> worst(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    double tau = prior.fixed_tau ? *prior.fixed_tau : prior.tau_prior.sample(rng);
    double lambda = prior.fixed_lambda ? *prior.fixed_lambda : prior.lambda_prior.sample(rng);
    CovarianceSpec cov(prior.kernel_family, tau, lambda, dim);
    GaussianSampler sampler(cov, prior.grid);
    GridFunction eta = sampler.draw(rng);
    if (prior.mean) eta.values += prior.mean->on_grid(prior.grid).values;
    worst[d] = max_derivative_norm(eta, dim, alpha);
  }

  ComplementCurve curve;
  for (const SieveSpec& s : specs) {
    std::size_t fail = 0;
    for (double w : worst) {
      if (!(w < s.M)) ++fail;
    }
    double p = static_cast<double>(fail) / static_cast<double>(draws);
    curve.M.push_back(s.M);
    curve.mass.push_back(p);
    curve.se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(draws)));
  }
  return curve;
}

double sieve_complement_mass(const PriorSpec& prior, const SieveSpec& spec, std::size_t draws,
                             RngEngine& rng) {
  return sieve_complement_curve(prior, {spec}, draws, rng).mass.front();
}

SeparationResult count_separated(const RealFunction& p, const RealFunction& p0,
                                 const std::vector<Point>& design, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  SeparationResult out;
  for (std::size_t i = 0; i < design.size(); ++i) {
    double gap = p(design[i]) - p0(design[i]);
    if (gap > eps) out.above.push_back(static_cast<int>(i));
    else if (gap < -eps) out.below.push_back(static_cast<int>(i));
  }
  return out;
}

TestResult hoeffding_test(const std::vector<int>& y, const std::vector<double>& mu0, double eps,
                          bool upper) {
  if (y.empty()) throw std::invalid_argument("test needs a nonempty slice");
  if (y.size() != mu0.size()) throw std::invalid_argument("slice and means misaligned");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
  const auto m = static_cast<double>(y.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) stat += static_cast<double>(y[i]) - mu0[i];
  TestResult out;
  out.statistic = stat;
  out.threshold = m * eps / 2.0;
  out.reject = upper ? stat > out.threshold : stat < -out.threshold;
  out.error_bound = std::exp(-m * eps * eps / 2.0);
  return out;
}

TestResult composite_test(const RealFunction& p0, const std::vector<RealFunction>& net,
                          const Dataset& data, double eps) {
  if (net.empty()) throw std::invalid_argument("net must be nonempty");
  if (data.n() == 0) throw std::invalid_argument("composite test needs data");
  TestResult out;
  out.statistic = -std::numeric_limits<double>::infinity();
  out.threshold = 0.0;
  out.reject = false;
  std::size_t m_min = data.n() + 1;
  std::size_t usable = 0;
  for (const RealFunction& pj : net) {
    SeparationResult sep = count_separated(pj, p0, data.x, eps);
    const std::vector<int>& side = sep.above.size() >= sep.below.size() ? sep.above : sep.below;
    const bool upper = sep.above.size() >= sep.below.size();
    if (side.empty()) continue;
    ++usable;
    std::vector<int> ys;
    std::vector<double> mus;
    ys.reserve(side.size());
    mus.reserve(side.size());
    for (int idx : side) {
      ys.push_back(data.y[static_cast<std::size_t>(idx)]);
      mus.push_back(p0(data.x[static_cast<std::size_t>(idx)]));
    }
    TestResult single = hoeffding_test(ys, mus, eps / 2.0, upper);
    double excess = upper ? single.statistic - single.threshold
                          : -single.statistic - single.threshold;
    out.statistic = std::max(out.statistic, excess);
    if (single.reject) out.reject = true;
    m_min = std::min(m_min, side.size());
  }
  if (usable == 0) {
    out.statistic = 0.0;
    out.error_bound = 0.0;
    return out;
  }
  out.error_bound = static_cast<double>(net.size()) *
                    std::exp(-static_cast<double>(m_min) * eps * eps / 8.0);
  return out;
}

}  // namespace gpbr
