#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "campaign_runners.hpp"
#include "gpbinreg/gp_sampler.hpp"
#include "gpbinreg/kernels.hpp"
#include "gpbinreg/posterior.hpp"
#include "gpbinreg/rkhs.hpp"
#include "gpbinreg/rng.hpp"
#include "gpbinreg/sieve.hpp"

namespace gpbr::runs {

namespace {

std::vector<double> param_vec(const ExperimentConfig& c, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : c.params.at(key)) out.push_back(v.get<double>());
  return out;
}

std::vector<int> param_vec_int(const ExperimentConfig& c, const std::string& key) {
  std::vector<int> out;
  for (const auto& v : c.params.at(key)) out.push_back(v.get<int>());
  return out;
}

/// Largest entrywise |emp - truth| in Monte Carlo standard errors, using the
/// Gaussian fourth-moment variance (s_ii s_jj + s_ij^2) / draws.
double max_cov_z(const Eigen::MatrixXd& emp, const Eigen::MatrixXd& truth, std::size_t draws) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i)
    for (Eigen::Index j = i; j < truth.cols(); ++j) {
      const double var = (truth(i, i) * truth(j, j) + truth(i, j) * truth(i, j)) /
                         static_cast<double>(draws);
      const double z = std::abs(emp(i, j) - truth(i, j)) / std::sqrt(var);
      worst = std::max(worst, z);
    }
  return worst;
}

Eigen::MatrixXd empirical_second_moment(const GaussianSampler& sampler, std::size_t draws,
                                        RngEngine& rng) {
  const auto n = static_cast<Eigen::Index>(sampler.size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t d = 0; d < draws; ++d) {
    const Eigen::VectorXd v = sampler.draw_values(rng);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
  acc /= static_cast<double>(draws);
  return acc.selfadjointView<Eigen::Lower>();
}

}  // namespace

void kl_truncation(const ExperimentConfig& config, CampaignReport& report) {
  const int grid_points = static_cast<int>(config.param("grid_points"));
  const double tau = config.param("tau");
  const double lambda = config.param("lambda");
  const auto draws = static_cast<std::size_t>(config.param("draws"));
  const double z_limit = config.param("z_limit");

  const Grid grid = Grid::uniform(0.0, 1.0, grid_points);
  const CovarianceSpec spec("squared-exponential", tau, lambda, 1);
  const Eigen::MatrixXd truth = gram(spec, grid);

  ReplicateRecord rec;
  rec.index = 0;

  // Exact sampler against the closed-form covariance.
  {
    auto rng = make_stream(config.seed, "kl-truncation/exact");
    const GaussianSampler sampler(spec, grid);
    const Eigen::MatrixXd emp = empirical_second_moment(sampler, draws, rng);
    rec.metrics["z_exact"] = max_cov_z(emp, truth, draws);
  }

  // Full-rank series sampler against the same covariance.
  const EigenSystem eigen = mercer_decompose(spec, grid);
  rec.metrics["rank"] = eigen.rank;
  {
    auto rng = make_stream(config.seed, "kl-truncation/series");
    KlTruncation trunc(eigen, eigen.rank);
    const GridFunction mean = GridFunction::zero(grid);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(grid.size(), grid.size());
    for (std::size_t d = 0; d < draws; ++d) {
      trunc.resample(rng);
      const GridFunction f = sample_kl(trunc, mean);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(f.values);
    }
    acc /= static_cast<double>(draws);
    const Eigen::MatrixXd emp = acc.selfadjointView<Eigen::Lower>();
    rec.metrics["z_series"] = max_cov_z(emp, truth, draws);
  }

  // Tail error must shrink as the truncation level grows.
  bool monotone = true;
  {
    auto rng = make_stream(config.seed, "kl-truncation/tail");
    const std::vector<int> levels = param_vec_int(config, "trunc_levels");
    double prev = 0.0, prev_se = 0.0;
    bool first = true;
    for (int level : levels) {
      const int n = std::min(level, eigen.rank - 1);
      double se = 0.0;
      const double err = truncation_error(eigen, n, 4000, rng, &se);
      rec.metrics["tail_err_" + std::to_string(level)] = err;
      if (!first && err > prev + 2.0 * std::sqrt(prev_se * prev_se + se * se)) monotone = false;
      prev = err;
      prev_se = se;
      first = false;
    }
  }

  // Gate at the top of the bandwidth ladder: the configured level must leave
  // a negligible tail even for the roughest prior paths.
  double gate_err = 0.0, gate_limit = 0.0;
  {
    const CovarianceSpec rough = spec.with(tau, config.param("gate_lambda"));
    const Grid gate_grid = Grid::uniform(0.0, 1.0, static_cast<int>(config.param("gate_grid")));
    const EigenSystem rough_eigen = mercer_decompose(rough, gate_grid);
    const int level = static_cast<int>(config.param("gate_level"));
    gate_limit = config.param("gate_ratio") * gram(rough, gate_grid).diagonal().maxCoeff();
    if (level < rough_eigen.rank) {
      auto rng = make_stream(config.seed, "kl-truncation/gate");
      gate_err = truncation_error(rough_eigen, level,
                                  static_cast<std::size_t>(config.param("gate_draws")), rng);
    }
    rec.metrics["gate_rank"] = rough_eigen.rank;
  }
  rec.metrics["gate_err"] = gate_err;
  rec.metrics["gate_limit"] = gate_limit;

  const bool pass_exact = rec.metrics["z_exact"] <= z_limit;
  const bool pass_series =
      rec.metrics["z_series"] <= z_limit && monotone && gate_err < gate_limit;
  rec.ok = pass_exact && pass_series;
  report.replicates.push_back(rec);
  report.aggregates = {{"z_exact", rec.metrics["z_exact"]},
                       {"z_series", rec.metrics["z_series"]},
                       {"gate_err", gate_err},
                       {"gate_limit", gate_limit},
                       {"monotone", monotone ? 1.0 : 0.0},
                       {"pass_exact", pass_exact ? 1.0 : 0.0},
                       {"pass_series", pass_series ? 1.0 : 0.0}};
  report.pass = pass_exact && pass_series;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "z_exact=%.2f z_series=%.2f gate=%.3g<%.3g",
                rec.metrics["z_exact"], rec.metrics["z_series"], gate_err, gate_limit);
  report.detail = buf;
}

void derivative_tails(const ExperimentConfig& config, CampaignReport& report) {
  const CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  const MultiIndex w(std::vector<int>{1});
  ReplicateRecord rec;
  rec.index = 0;

  // First-derivative sampler against the closed-form derivative covariance.
  {
    const int pts = static_cast<int>(config.param("cov_grid_points"));
    const auto draws = static_cast<std::size_t>(config.param("cov_draws"));
    const Grid grid = Grid::uniform(0.0, 1.0, pts);
    const Eigen::MatrixXd truth = gram(spec, grid, w);
    auto rng = make_stream(config.seed, "derivative-tails/cov");
    const GaussianSampler sampler(spec, grid, w);
    const Eigen::MatrixXd emp = empirical_second_moment(sampler, draws, rng);
    rec.metrics["z_cov"] = max_cov_z(emp, truth, draws);
  }

  // Difference quotients of plain paths must reproduce the same covariance:
  // the derivative field is not a separate model, just the path's slope.
  {
    const int base_n = static_cast<int>(config.param("fd_base_points"));
    const double h = config.param("fd_step");
    const auto draws = static_cast<std::size_t>(config.param("fd_draws"));
    std::vector<Point> base, staggered;
    for (int i = 0; i < base_n; ++i) {
      const double x = (i + 0.5) / base_n;
      base.push_back({x});
      staggered.push_back({x - h});
      staggered.push_back({x + h});
    }
    const Eigen::MatrixXd truth = gram(spec, base, w);
    const GaussianSampler sampler(spec, staggered, MultiIndex::zero(1));
    auto rng = make_stream(config.seed, "derivative-tails/fd");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(base_n, base_n);
    Eigen::VectorXd q(base_n);
    for (std::size_t d = 0; d < draws; ++d) {
      const Eigen::VectorXd v = sampler.draw_values(rng);
      for (int i = 0; i < base_n; ++i) q[i] = (v[2 * i + 1] - v[2 * i]) / (2.0 * h);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(q);
    }
    acc /= static_cast<double>(draws);
    const Eigen::MatrixXd emp = acc.selfadjointView<Eigen::Lower>();
    rec.metrics["fd_max_abs"] = (emp - truth).cwiseAbs().maxCoeff();
  }

  // Sup-norm tail of the derivative field: log-frequency must fall linearly
  // in the squared threshold.
  {
    const Grid grid = Grid::uniform(0.0, 1.0, static_cast<int>(config.param("tail_grid")));
    const auto draws = static_cast<std::size_t>(config.param("tail_draws"));
    Point origin{0.5};
    const double sigma_w = std::sqrt(spec.derivative(w, origin, origin));
    std::vector<double> thresholds;
    for (double f : param_vec(config, "tail_factors")) thresholds.push_back(f * sigma_w);
    auto rng = make_stream(config.seed, "derivative-tails/tail");
    const auto curve = sup_tail_curve(spec, w, grid, thresholds, draws, rng);
    const TailFit fit = fit_tail_curve(curve);
    rec.metrics["tail_c2"] = fit.c2;
    rec.metrics["tail_r2"] = fit.r_squared;
    rec.metrics["tail_points"] = fit.points_used;
    for (std::size_t i = 0; i < curve.size(); ++i)
      rec.metrics["tail_hits_" + std::to_string(i)] = static_cast<double>(curve[i].hits);
  }

  const double z_limit = config.param("z_limit");
  const bool pass_cov =
      rec.metrics["z_cov"] <= z_limit && rec.metrics["fd_max_abs"] <= config.param("fd_tolerance");
  const bool pass_tail = rec.metrics["tail_c2"] > 0.0 &&
                         rec.metrics["tail_r2"] >= config.param("tail_min_r2") &&
                         rec.metrics["tail_points"] >= 5;
  rec.ok = pass_cov && pass_tail;
  report.replicates.push_back(rec);
  report.aggregates = {{"z_cov", rec.metrics["z_cov"]},
                       {"fd_max_abs", rec.metrics["fd_max_abs"]},
                       {"tail_c2", rec.metrics["tail_c2"]},
                       {"tail_r2", rec.metrics["tail_r2"]},
                       {"pass_cov", pass_cov ? 1.0 : 0.0},
                       {"pass_tail", pass_tail ? 1.0 : 0.0}};
  report.pass = pass_cov && pass_tail;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "z_cov=%.2f fd=%.2g c2=%.3f r2=%.3f", rec.metrics["z_cov"],
                rec.metrics["fd_max_abs"], rec.metrics["tail_c2"], rec.metrics["tail_r2"]);
  report.detail = buf;
}

void small_ball(const ExperimentConfig& config, CampaignReport& report) {
  const CovarianceSpec spec("squared-exponential", 1.0, 1.0, 1);
  const Grid grid = Grid::uniform(0.0, 1.0, static_cast<int>(config.param("grid_points")));
  const auto draws = static_cast<std::size_t>(config.param("draws"));
  const auto min_hits = static_cast<std::size_t>(config.param("min_hits"));
  const std::vector<double> eps_factors = param_vec(config, "eps_factors");

  auto kernel = make_kernel("squared-exponential");
  std::vector<RkhsElement> targets;
  targets.push_back(RkhsElement::zero(1));
  targets.push_back(RkhsElement(kernel, 1.0, {Point{0.5}}, Eigen::VectorXd::Constant(1, 1.0)));
  {
    Eigen::VectorXd c(2);
    c << 1.0, -1.0;
    targets.push_back(RkhsElement(kernel, 1.0, {Point{0.25}, Point{0.75}}, c));
  }

  Point probe{0.0};
  const double path_scale = std::sqrt(spec.evaluate(probe, probe));

  std::size_t worst_hits = draws;
  bool monotone = true;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    ReplicateRecord rec;
    rec.index = static_cast<int>(t);
    rec.metrics["norm_sq"] = rkhs_norm_sq(targets[t]);
    double prev = -1.0;
    for (std::size_t e = 0; e < eps_factors.size(); ++e) {
      auto rng = make_stream(config.seed, "small-ball/t" + std::to_string(t), e);
      const double eps = eps_factors[e] * path_scale;
      const SmallBallEstimate est =
          small_ball_probability(spec, targets[t], eps, grid, draws, rng);
      const std::string tag = "e" + std::to_string(e);
      rec.metrics["hits_" + tag] = static_cast<double>(est.hits);
      rec.metrics["prob_" + tag] = est.estimate;
      rec.metrics["wilson_lo_" + tag] = est.wilson_lo;
      worst_hits = std::min(worst_hits, est.hits);
      // Independent streams per cell, so only flag clear inversions.
      if (est.estimate + 3.0 * (est.wilson_hi - est.wilson_lo) < prev) monotone = false;
      prev = est.estimate;
    }
    rec.ok = true;
    report.replicates.push_back(rec);
  }

  const bool pass_all = worst_hits >= min_hits && monotone;
  report.aggregates = {{"worst_hits", static_cast<double>(worst_hits)},
                       {"monotone", monotone ? 1.0 : 0.0},
                       {"pass_all", pass_all ? 1.0 : 0.0}};
  report.pass = pass_all;
  report.detail = "worst cell hits=" + std::to_string(worst_hits) + "/" +
                  std::to_string(draws) + " across " + std::to_string(targets.size()) +
                  " targets x " + std::to_string(eps_factors.size()) + " radii";
}

void sieve_mass(const ExperimentConfig& config, CampaignReport& report) {
  const int alpha = static_cast<int>(config.param("alpha"));
  const double r = config.param("r");
  const double s = config.param("s");
  const double b1 = config.param("b1");
  const std::vector<double> n_list = param_vec(config, "n_list");

  PriorSpec prior;
  prior.grid = Grid::uniform(0.0, 1.0, static_cast<int>(config.param("grid_points")));
  prior.validate();

  std::vector<SieveSpec> specs;
  for (double n : n_list) specs.push_back(SieveSpec::from_growth(n, 1, alpha, r, s, b1));

  auto rng = make_stream(config.seed, "sieve-mass/draws");
  const auto draws = static_cast<std::size_t>(config.param("draws"));
  const ComplementCurve curve = sieve_complement_curve(prior, specs, draws, rng);

  const GrowthCheck growth = assumption_g_check(1, alpha, r, s);

  bool nonincreasing = true;
  for (std::size_t i = 0; i + 1 < curve.mass.size(); ++i)
    if (curve.mass[i + 1] > curve.mass[i]) nonincreasing = false;
  const double first = curve.mass.front(), last = curve.mass.back();
  const double span_se = std::sqrt(curve.se.front() * curve.se.front() +
                                   curve.se.back() * curve.se.back());
  const bool decays = (first - last > 2.0 * span_se) || first < 0.01;

  for (std::size_t i = 0; i < curve.M.size(); ++i) {
    ReplicateRecord rec;
    rec.index = static_cast<int>(i);
    rec.metrics["n"] = n_list[i];
    rec.metrics["M"] = curve.M[i];
    rec.metrics["mass"] = curve.mass[i];
    rec.metrics["se"] = curve.se[i];
    rec.ok = true;
    report.replicates.push_back(rec);
  }

  const bool pass_all = nonincreasing && decays && growth.feasible;
  report.aggregates = {{"mass_first", first},
                       {"mass_last", last},
                       {"alpha_bound", growth.alpha_bound},
                       {"growth_feasible", growth.feasible ? 1.0 : 0.0},
                       {"nonincreasing", nonincreasing ? 1.0 : 0.0},
                       {"pass_all", pass_all ? 1.0 : 0.0}};
  report.pass = pass_all;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "complement mass %.3f -> %.3f over M %.2f -> %.2f", first, last,
                curve.M.front(), curve.M.back());
  report.detail = buf;
}

void entropy(const ExperimentConfig& config, CampaignReport& report) {
  const Grid grid = Grid::uniform(0.0, 1.0, static_cast<int>(config.param("grid_points")));
  const int levels = static_cast<int>(config.param("levels"));
  const auto samples = static_cast<std::size_t>(config.param("samples"));
  const std::vector<double> m_list = param_vec(config, "m_list");
  const std::vector<double> eps_rel = param_vec(config, "eps_rel");
  const double shared_eps = config.param("shared_eps");
  const int alpha = static_cast<int>(config.param("alpha"));

  int membership_violations = 0;
  std::vector<double> exponents;
  std::vector<int> shared_sizes;

  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    const double M = m_list[mi];
    auto rng = make_stream(config.seed, "entropy/sample", mi);
    std::vector<Eigen::VectorXd> sample;
    sample.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      GridFunction f = sample_smooth_class(grid, M, levels, rng);
      if (s < 50) {
        const SieveMembership mem = sieve_member(f, SieveSpec::manual(1, alpha, M));
        if (!mem.member) ++membership_violations;
      }
      sample.push_back(std::move(f.values));
    }

    ReplicateRecord rec;
    rec.index = static_cast<int>(mi);
    rec.metrics["M"] = M;

    // Fit log log N against log 1/eps; the growth law predicts slope d/alpha.
    std::vector<double> xs, ys;
    for (std::size_t e = 0; e < eps_rel.size(); ++e) {
      const double eps = eps_rel[e] * M;
      const CoverResult cover = covering_number(sample, eps);
      rec.metrics["net_e" + std::to_string(e)] = cover.size;
      if (cover.size >= 3 && static_cast<std::size_t>(cover.size) < samples) {
        xs.push_back(std::log(1.0 / eps));
        ys.push_back(std::log(std::log(static_cast<double>(cover.size))));
      }
    }
    double slope = 0.0;
    if (xs.size() >= 3) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= xs.size();
      my /= ys.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      slope = sxy / sxx;
    }
    rec.metrics["exponent"] = slope;
    rec.metrics["fit_points"] = static_cast<double>(xs.size());
    exponents.push_back(slope);

    const CoverResult shared = covering_number(sample, shared_eps);
    rec.metrics["net_shared"] = shared.size;
    shared_sizes.push_back(shared.size);
    rec.ok = true;
    report.replicates.push_back(rec);
  }

  const double lo = config.param("exponent_lo"), hi = config.param("exponent_hi");
  bool exponents_ok = true;
  for (double e : exponents)
    if (e < lo || e > hi) exponents_ok = false;
  bool monotone_in_m = true;
  for (std::size_t i = 0; i + 1 < shared_sizes.size(); ++i)
    if (shared_sizes[i + 1] <= shared_sizes[i]) monotone_in_m = false;

  const bool pass_all = exponents_ok && monotone_in_m && membership_violations == 0;
  report.aggregates = {{"exponent_mid", exponents[exponents.size() / 2]},
                       {"membership_violations", static_cast<double>(membership_violations)},
                       {"monotone_in_m", monotone_in_m ? 1.0 : 0.0},
                       {"exponents_ok", exponents_ok ? 1.0 : 0.0},
                       {"pass_all", pass_all ? 1.0 : 0.0}};
  report.pass = pass_all;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "exponents=[%.2f, %.2f, %.2f] target 1/2, nets at shared eps %d<%d<%d",
                exponents.size() > 0 ? exponents[0] : 0.0,
                exponents.size() > 1 ? exponents[1] : 0.0,
                exponents.size() > 2 ? exponents[2] : 0.0,
                shared_sizes.size() > 0 ? shared_sizes[0] : 0,
                shared_sizes.size() > 1 ? shared_sizes[1] : 0,
                shared_sizes.size() > 2 ? shared_sizes[2] : 0);
  report.detail = buf;
}

}  // namespace gpbr::runs
