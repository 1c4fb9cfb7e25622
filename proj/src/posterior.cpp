#include "gpbinreg/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpbr {

double TauPrior::sample(RngEngine& rng) const {
  std::gamma_distribution<double> g(shape, 1.0 / scale);
  double x = g(rng);
  while (x <= 0.0) x = g(rng);
  return 1.0 / x;
}

double TauPrior::log_density(double tau) const {
  if (!(tau > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(tau) -
         scale / tau;
}

double LambdaPrior::sample(RngEngine& rng) const {
  if (kind == Kind::log1p_exponential) {
    std::exponential_distribution<double> e(rate);
    return std::log1p(e(rng));
  }
  std::gamma_distribution<double> g(shape, scale);
  double x = g(rng);
  while (x <= 0.0) x = g(rng);
  return x;
}

double LambdaPrior::log_density(double lambda) const {
  if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
  if (kind == Kind::log1p_exponential) {
    return std::log(rate) - rate * std::expm1(lambda) + lambda;
  }
  return (shape - 1.0) * std::log(lambda) - lambda / scale - std::lgamma(shape) -
         shape * std::log(scale);
}

void PriorSpec::validate() const {
  if (truncation < 1) throw std::invalid_argument("truncation must be at least 1");
  if (grid.empty()) throw std::invalid_argument("prior needs a grid");
  if (!fixed_lambda) {
    if (ladder_rungs < 2) throw std::invalid_argument("ladder needs at least 2 rungs");
    if (!(ladder_lo > 0.0 && ladder_hi > ladder_lo)) {
      throw std::invalid_argument("ladder bounds must satisfy 0 < lo < hi");
    }
  }
  if (fixed_tau && !(*fixed_tau > 0.0)) throw std::invalid_argument("fixed tau must be positive");
  if (fixed_lambda && !(*fixed_lambda > 0.0)) {
    throw std::invalid_argument("fixed lambda must be positive");
  }
  if (mean && mean->dim() != grid.dim()) {
    throw std::invalid_argument("mean dimension must match the grid");
  }
  make_kernel(kernel_family);
}

EigenCache::EigenCache(const PriorSpec& prior)
    : family_(prior.kernel_family), dim_(prior.grid.dim()), grid_(prior.grid) {
  if (prior.fixed_lambda) {
    values_ = {*prior.fixed_lambda};
    log_step_ = 0.0;
    return;
  }
  const int r = prior.ladder_rungs;
  values_.resize(static_cast<std::size_t>(r));
  log_step_ = std::log(prior.ladder_hi / prior.ladder_lo) / static_cast<double>(r - 1);
  for (int j = 0; j < r; ++j) {
    values_[static_cast<std::size_t>(j)] = prior.ladder_lo * std::exp(log_step_ * j);
  }
}

int EigenCache::snap(double lambda) const {
  if (values_.size() == 1) return 0;
  double u = (std::log(lambda) - std::log(values_.front())) / log_step_;
  auto j = static_cast<long>(std::lround(u));
  if (j < 0) j = 0;
  if (j >= static_cast<long>(values_.size())) j = static_cast<long>(values_.size()) - 1;
  return static_cast<int>(j);
}

const EigenSystem& EigenCache::at(int rung) const {
  auto it = cache_.find(rung);
  if (it != cache_.end()) return it->second;
  CovarianceSpec spec(family_, 1.0, rung_value(rung), dim_);
  EigenSystem sys = mercer_decompose(spec, grid_);
  return cache_.emplace(rung, std::move(sys)).first->second;
}

namespace {

// Linear interpolation stencil of the prior grid at one covariate.
struct InterpRow {
  int count = 0;
  Eigen::Index index[4];
  double weight[4];
};

InterpRow interp_row(const Grid& grid, const Point& x) {
  const double pad = 1e-9 * (grid.hi() - grid.lo());
  for (double v : x) {
    if (v < grid.lo() - pad || v > grid.hi() + pad) {
      throw std::invalid_argument("covariate outside the prior grid domain");
    }
  }
  auto locate = [&grid](double v) {
    double u = (v - grid.lo()) / grid.step();
    if (u < 0.0) u = 0.0;
    auto i = static_cast<Eigen::Index>(u);
    auto last = static_cast<Eigen::Index>(grid.points_per_dim()) - 1;
    if (i >= last) i = last - 1;
    return std::pair<Eigen::Index, double>(i, u - static_cast<double>(i));
  };
  InterpRow row;
  if (grid.dim() == 1) {
    auto [i, t] = locate(x[0]);
    row.count = 2;
    row.index[0] = i;
    row.weight[0] = 1.0 - t;
    row.index[1] = i + 1;
    row.weight[1] = t;
  } else if (grid.dim() == 2) {
    auto [i0, t0] = locate(x[0]);
    auto [i1, t1] = locate(x[1]);
    auto m = static_cast<Eigen::Index>(grid.points_per_dim());
    row.count = 4;
    row.index[0] = i0 * m + i1;
    row.weight[0] = (1.0 - t0) * (1.0 - t1);
    row.index[1] = i0 * m + i1 + 1;
    row.weight[1] = (1.0 - t0) * t1;
    row.index[2] = (i0 + 1) * m + i1;
    row.weight[2] = t0 * (1.0 - t1);
    row.index[3] = (i0 + 1) * m + i1 + 1;
    row.weight[3] = t0 * t1;
  } else {
    throw std::invalid_argument("posterior grids support d <= 2");
  }
  return row;
}

Eigen::VectorXd apply_interp(const std::vector<InterpRow>& rows, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < rows[i].count; ++k) acc += rows[i].weight[k] * v[rows[i].index[k]];
    out[static_cast<Eigen::Index>(i)] = acc;
  }
  return out;
}

Eigen::MatrixXd apply_interp(const std::vector<InterpRow>& rows, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)).setZero();
    for (int k = 0; k < rows[i].count; ++k) {
      out.row(static_cast<Eigen::Index>(i)) += rows[i].weight[k] * m.row(rows[i].index[k]);
    }
  }
  return out;
}

struct ChainState {
  Eigen::VectorXd xi;
  double tau = 1.0;
  int rung = 0;
  Eigen::VectorXd u;  // data-side basis times xi
  double log_lik = 0.0;
};

class ChainWorkspace {
 public:
  ChainWorkspace(const PriorSpec& prior, const Dataset& data)
      : prior_(prior), cache_(prior), link_(prior.link) {
    // Canonical data order makes the likelihood sum independent of the
    // caller's row order, so relabeled datasets reproduce bit-identical runs.
    std::vector<std::size_t> order(data.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&data](std::size_t a, std::size_t b) {
      if (data.x[a] != data.x[b]) return data.x[a] < data.x[b];
      return data.y[a] < data.y[b];
    });
    y_.reserve(data.n());
    rows_.reserve(data.n());
    for (std::size_t idx : order) {
      rows_.push_back(interp_row(prior.grid, data.x[idx]));
      y_.push_back(data.y[idx]);
    }
    mu_grid_ = prior.mean ? prior.mean->on_grid(prior.grid).values
                          : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prior.grid.size()));
    mu_data_ = apply_interp(rows_, mu_grid_);
  }

  const EigenCache& cache() const { return cache_; }
  const Eigen::VectorXd& mu_grid() const { return mu_grid_; }
  std::size_t n() const { return y_.size(); }

  const Eigen::MatrixXd& grid_basis(int rung) {
    auto it = grid_basis_.find(rung);
    if (it != grid_basis_.end()) return it->second;
    const EigenSystem& sys = cache_.at(rung);
    const int N = prior_.truncation;
    const auto cols = std::min<Eigen::Index>(N, sys.eigenvalues.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(prior_.grid.size()), N);
    b.leftCols(cols) = sys.eigenfunctions.leftCols(cols) *
                       sys.eigenvalues.head(cols).cwiseSqrt().asDiagonal();
    return grid_basis_.emplace(rung, std::move(b)).first->second;
  }

  const Eigen::MatrixXd& data_basis(int rung) {
    auto it = data_basis_.find(rung);
    if (it != data_basis_.end()) return it->second;
    Eigen::MatrixXd b = apply_interp(rows_, grid_basis(rung));
    return data_basis_.emplace(rung, std::move(b)).first->second;
  }

  double log_lik(const Eigen::VectorXd& u, double tau) const {
    const double s = 1.0 / std::sqrt(tau);
    double acc = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      double eta = mu_data_[static_cast<Eigen::Index>(i)] + s * u[static_cast<Eigen::Index>(i)];
      double p = clamp_prob(link_.forward(eta));
      acc += y_[i] == 1 ? std::log(p) : std::log1p(-p);
    }
    return acc;
  }

 private:
  const PriorSpec& prior_;
  EigenCache cache_;
  LinkFunction link_;
  std::vector<InterpRow> rows_;
  std::vector<int> y_;
  Eigen::VectorXd mu_grid_;
  Eigen::VectorXd mu_data_;
  std::map<int, Eigen::MatrixXd> grid_basis_;
  std::map<int, Eigen::MatrixXd> data_basis_;
};

}  // namespace

ChainResult run_chain(const PriorSpec& prior, const Dataset& data, std::size_t iters,
                      std::size_t burn, RngEngine& rng) {
  prior.validate();
  if (iters <= burn) throw std::invalid_argument("iters must exceed burn");

  ChainWorkspace ws(prior, data);
  const int N = prior.truncation;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  ChainState st;
  st.xi = Eigen::VectorXd::NullaryExpr(N, [&]() { return gauss(rng); });
  st.tau = prior.fixed_tau ? *prior.fixed_tau : prior.tau_prior.sample(rng);
  st.rung = prior.fixed_lambda ? 0 : ws.cache().snap(prior.lambda_prior.sample(rng));
  st.u = ws.data_basis(st.rung) * st.xi;
  st.log_lik = ws.log_lik(st.u, st.tau);

  double xi_step = 0.3, tau_step = 0.5, lambda_step = 0.5;
  std::size_t xi_props = 0, xi_accepts = 0;
  std::size_t tau_props = 0, tau_accepts = 0;
  std::size_t lambda_props = 0, lambda_accepts = 0;
  std::size_t eigen_failures = 0;
  std::size_t slice_shrinks = 0, slice_updates = 0;

  auto adapt = [](double& step, bool accepted, double target, std::size_t t) {
    double gain = 1.0 / std::pow(static_cast<double>(t) + 10.0, 0.6);
    step *= std::exp(gain * ((accepted ? 1.0 : 0.0) - target));
    step = std::clamp(step, 1e-3, 10.0);
  };

  ChainResult result;
  result.draws.reserve(iters - burn);
  std::vector<double> trace_ll, trace_xi1;
  trace_ll.reserve(iters - burn);
  trace_xi1.reserve(iters - burn);

  const double log_lo =
      prior.fixed_lambda ? 0.0 : std::log(prior.ladder_lo);
  const double h = ws.cache().log_step();

  for (std::size_t t = 0; t < iters; ++t) {
    const bool adapting = t < burn;

    // Latent coefficients.
    if (prior.elliptical_xi) {
      Eigen::VectorXd nu = Eigen::VectorXd::NullaryExpr(N, [&]() { return gauss(rng); });
      Eigen::VectorXd v = ws.data_basis(st.rung) * nu;
      double logy = st.log_lik + std::log(unif(rng));
      double theta = 2.0 * M_PI * unif(rng);
      double lo = theta - 2.0 * M_PI, hi = theta;
      ++slice_updates;
      for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd xi_prop = st.xi * std::cos(theta) + nu * std::sin(theta);
        Eigen::VectorXd u_prop = st.u * std::cos(theta) + v * std::sin(theta);
        double ll = ws.log_lik(u_prop, st.tau);
        if (ll > logy || (hi - lo) < 1e-12) {
          st.xi = std::move(xi_prop);
          st.u = std::move(u_prop);
          st.log_lik = ll;
          break;
        }
        ++slice_shrinks;
        if (theta < 0.0) lo = theta;
        else hi = theta;
        theta = lo + (hi - lo) * unif(rng);
      }
    } else {
      ++xi_props;
      Eigen::VectorXd step = Eigen::VectorXd::NullaryExpr(N, [&]() { return gauss(rng); });
      Eigen::VectorXd xi_prop = st.xi + xi_step * step;
      Eigen::VectorXd u_prop = st.u + xi_step * (ws.data_basis(st.rung) * step);
      double ll = ws.log_lik(u_prop, st.tau);
      double delta = ll - st.log_lik - 0.5 * (xi_prop.squaredNorm() - st.xi.squaredNorm());
      bool acc = std::log(unif(rng)) < delta;
      if (acc) {
        st.xi = std::move(xi_prop);
        st.u = std::move(u_prop);
        st.log_lik = ll;
        ++xi_accepts;
      }
      if (adapting) adapt(xi_step, acc, 0.25, t);
    }

    // Precision.
    if (!prior.fixed_tau) {
      ++tau_props;
      double log_tau = std::log(st.tau);
      double log_prop = log_tau + tau_step * gauss(rng);
      double tau_prop = std::exp(log_prop);
      double ll = ws.log_lik(st.u, tau_prop);
      double delta = ll - st.log_lik + prior.tau_prior.log_density(tau_prop) -
                     prior.tau_prior.log_density(st.tau) + log_prop - log_tau;
      bool acc = std::log(unif(rng)) < delta;
      if (acc) {
        st.tau = tau_prop;
        st.log_lik = ll;
        ++tau_accepts;
      }
      if (adapting) adapt(tau_step, acc, 0.44, t);
    }

    // Bandwidth, proposed on the log scale and snapped to the ladder. Rung
    // centers are equally spaced in log lambda, so the snapped proposal is
    // symmetric in the rung index and the Metropolis ratio needs only the
    // prior density (with log-scale Jacobian) and the likelihood.
    if (!prior.fixed_lambda) {
      ++lambda_props;
      double theta_cur = log_lo + h * st.rung;
      double theta_prop = theta_cur + lambda_step * gauss(rng);
      bool acc = false;
      double lo_edge = log_lo - 0.5 * h;
      double hi_edge = log_lo + h * (ws.cache().rungs() - 1) + 0.5 * h;
      if (theta_prop >= lo_edge && theta_prop <= hi_edge) {
        int rung_prop = ws.cache().snap(std::exp(theta_prop));
        if (rung_prop == st.rung) {
          acc = true;
        } else {
          try {
            const Eigen::MatrixXd& basis = ws.data_basis(rung_prop);
            Eigen::VectorXd u_prop = basis * st.xi;
            double ll = ws.log_lik(u_prop, st.tau);
            double lam_cur = ws.cache().rung_value(st.rung);
            double lam_prop = ws.cache().rung_value(rung_prop);
            double delta = ll - st.log_lik +
                           prior.lambda_prior.log_density(lam_prop) + std::log(lam_prop) -
                           prior.lambda_prior.log_density(lam_cur) - std::log(lam_cur);
            if (std::log(unif(rng)) < delta) {
              st.rung = rung_prop;
              st.u = std::move(u_prop);
              st.log_lik = ll;
              acc = true;
            }
          } catch (const std::runtime_error&) {
            ++eigen_failures;
          }
        }
      }
      if (acc) ++lambda_accepts;
      if (adapting) adapt(lambda_step, acc, 0.44, t);
    }

    if (t >= burn) {
      PosteriorDraw d;
      d.xi = st.xi;
      d.tau = st.tau;
      d.lambda = ws.cache().rung_value(st.rung);
      Eigen::VectorXd eta =
          ws.mu_grid() + (1.0 / std::sqrt(st.tau)) * (ws.grid_basis(st.rung) * st.xi);
      Eigen::VectorXd p(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        p[i] = clamp_prob(prior.link.forward(eta[i]));
      }
      d.eta = GridFunction(prior.grid, std::move(eta));
      d.p = GridFunction(prior.grid, std::move(p));
      d.log_lik = st.log_lik;
      trace_ll.push_back(d.log_lik);
      trace_xi1.push_back(d.xi[0]);
      result.draws.push_back(std::move(d));
    }
  }

  ChainDiagnostics& diag = result.diagnostics;
  diag.kept = result.draws.size();
  diag.xi_accept = prior.elliptical_xi
                       ? 1.0
                       : (xi_props ? static_cast<double>(xi_accepts) / xi_props : 0.0);
  diag.slice_steps_mean =
      slice_updates ? static_cast<double>(slice_shrinks) / slice_updates : 0.0;
  diag.tau_accept = tau_props ? static_cast<double>(tau_accepts) / tau_props : 0.0;
  diag.lambda_accept =
      lambda_props ? static_cast<double>(lambda_accepts) / lambda_props : 0.0;
  diag.eigen_failures = eigen_failures;
  diag.ess_log_lik = effective_sample_size(trace_ll);
  diag.ess_xi1 = effective_sample_size(trace_xi1);
  diag.rhat_log_lik = split_rhat(trace_ll);
  diag.rhat_xi1 = split_rhat(trace_xi1);
  return result;
}

double posterior_l1_mass(const std::vector<PosteriorDraw>& draws, const RealFunction& p0,
                         double eps, const L1Measure& measure) {
  if (draws.empty()) throw std::invalid_argument("posterior mass needs at least one draw");
  std::size_t over = 0;
  for (const PosteriorDraw& d : draws) {
    if (l1_distance(as_function(d.p), p0, measure) > eps) ++over;
  }
  return static_cast<double>(over) / static_cast<double>(draws.size());
}

PosteriorSummary posterior_summary(const std::vector<PosteriorDraw>& draws,
                                   const std::vector<double>& quantiles) {
  if (draws.empty()) throw std::invalid_argument("summary needs at least one draw");
  for (double q : quantiles) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantiles must lie in (0,1)");
  }
  const Grid& grid = draws.front().p.grid;
  const auto G = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(G);
  for (const PosteriorDraw& d : draws) mean += d.p.values;
  mean /= static_cast<double>(draws.size());

  PosteriorSummary out{GridFunction(grid, std::move(mean)), {}};
  std::vector<double> column(draws.size());
  std::vector<Eigen::VectorXd> bands(quantiles.size(), Eigen::VectorXd(G));
  for (Eigen::Index g = 0; g < G; ++g) {
    for (std::size_t i = 0; i < draws.size(); ++i) column[i] = draws[i].p.values[g];
    std::sort(column.begin(), column.end());
    for (std::size_t qi = 0; qi < quantiles.size(); ++qi) {
      double pos = quantiles[qi] * static_cast<double>(column.size() - 1);
      auto lo = static_cast<std::size_t>(pos);
      std::size_t hi = std::min(lo + 1, column.size() - 1);
      double t = pos - static_cast<double>(lo);
      bands[qi][g] = (1.0 - t) * column[lo] + t * column[hi];
    }
  }
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi) {
    out.quantiles.emplace_back(quantiles[qi], GridFunction(grid, std::move(bands[qi])));
  }
  return out;
}

double effective_sample_size(const std::vector<double>& trace) {
  const std::size_t m = trace.size();
  if (m < 4) return static_cast<double>(m);
  double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(m);
  double var = 0.0;
  for (double v : trace) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  if (var <= 0.0) return static_cast<double>(m);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < m; ++i) acc += (trace[i] - mean) * (trace[i + lag] - mean);
    return acc / static_cast<double>(m);
  };
  // Geyer initial positive sequence over autocorrelation pairs.
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < m / 2; k += 2) {
    double pair = (autocov(k) + autocov(k + 1)) / var;
    if (pair <= 0.0) break;
    sum += pair;
  }
  double ess = static_cast<double>(m) / (1.0 + 2.0 * sum);
  return std::clamp(ess, 1.0, static_cast<double>(m));
}

double split_rhat(const std::vector<double>& trace) {
  const std::size_t m = trace.size() / 2;
  if (m < 2) return 1.0;
  auto stats = [&](std::size_t begin) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += trace[begin + i];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      var += (trace[begin + i] - mean) * (trace[begin + i] - mean);
    }
    var /= static_cast<double>(m - 1);
    return std::pair<double, double>(mean, var);
  };
  auto [m1, v1] = stats(0);
  auto [m2, v2] = stats(m);
  double w = 0.5 * (v1 + v2);
  if (w <= 0.0) return 1.0;
  double grand = 0.5 * (m1 + m2);
  double b = static_cast<double>(m) *
             ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
  double v_hat = (static_cast<double>(m - 1) / static_cast<double>(m)) * w +
                 b / static_cast<double>(m);
  return std::sqrt(v_hat / w);
}

}  // namespace gpbr
