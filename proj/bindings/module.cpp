// Python face of the library. One-dimensional covariates throughout; the
// heavyweight entry points release the GIL while the C++ side runs.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpbinreg/bernstein.hpp"
#include "gpbinreg/binary_model.hpp"
#include "gpbinreg/campaigns.hpp"
#include "gpbinreg/gp_sampler.hpp"
#include "gpbinreg/kernels.hpp"
#include "gpbinreg/posterior.hpp"
#include "gpbinreg/rkhs.hpp"
#include "gpbinreg/rng.hpp"

namespace py = pybind11;

namespace {

std::vector<gpbr::Point> to_points(const std::vector<double>& xs) {
  std::vector<gpbr::Point> pts;
  pts.reserve(xs.size());
  for (double v : xs) pts.push_back(gpbr::Point{v});
  return pts;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

gpbr::RkhsElement make_element(const std::vector<double>& nodes, const std::vector<double>& coeffs,
                               double lam) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) c[static_cast<Eigen::Index>(i)] = coeffs[i];
  return gpbr::RkhsElement(gpbr::make_kernel("squared-exponential"), lam, to_points(nodes),
                           std::move(c));
}

py::dict simulate_py(std::size_t n, std::uint64_t seed, const std::vector<double>& nodes,
                     const std::vector<double>& coeffs, double lam, const std::string& link_name,
                     const std::string& distribution, bool sort) {
  gpbr::DesignSpec design;
  design.q = distribution == "beta" ? gpbr::CovariateDistribution::beta_2_5
                                    : gpbr::CovariateDistribution::uniform;
  design.sort_covariates = sort;
  const gpbr::RkhsElement eta0 = make_element(nodes, coeffs, lam);
  const gpbr::LinkFunction link = gpbr::LinkFunction::by_name(link_name);
  const gpbr::RealFunction p0 = gpbr::response_function(eta0, link);

  gpbr::Dataset data;
  {
    py::gil_scoped_release release;
    auto rng = gpbr::make_stream(seed, "simulate");
    data = gpbr::simulate(p0, design, n, rng);
  }
  std::vector<double> x, p;
  std::vector<int> y = data.y;
  for (const auto& pt : data.x) {
    x.push_back(pt[0]);
    p.push_back(p0(pt));
  }
  py::dict out;
  out["x"] = x;
  out["y"] = y;
  out["p0"] = p;
  return out;
}

py::dict fit_py(const std::vector<double>& x, const std::vector<int>& y, std::size_t iters,
                std::size_t burn, std::uint64_t seed, int grid_points, int truncation,
                const std::string& link_name, std::optional<double> fixed_tau,
                std::optional<double> fixed_lambda) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y must have equal length");
  gpbr::Dataset data;
  data.x = to_points(x);
  data.y = y;

  gpbr::PriorSpec prior;
  prior.link = gpbr::LinkFunction::by_name(link_name);
  prior.grid = gpbr::Grid::uniform(0.0, 1.0, grid_points);
  prior.truncation = truncation;
  prior.fixed_tau = fixed_tau;
  prior.fixed_lambda = fixed_lambda;

  gpbr::ChainResult res;
  gpbr::PosteriorSummary summary;
  {
    py::gil_scoped_release release;
    auto rng = gpbr::make_stream(seed, "fit");
    res = gpbr::run_chain(prior, data, iters, burn, rng);
    summary = gpbr::posterior_summary(res.draws, {0.1, 0.5, 0.9});
  }

  std::vector<double> grid, tau, lambda, log_lik;
  for (const auto& pt : prior.grid.points()) grid.push_back(pt[0]);
  for (const auto& d : res.draws) {
    tau.push_back(d.tau);
    lambda.push_back(d.lambda);
    log_lik.push_back(d.log_lik);
  }

  py::dict diag;
  diag["xi_accept"] = res.diagnostics.xi_accept;
  diag["tau_accept"] = res.diagnostics.tau_accept;
  diag["lambda_accept"] = res.diagnostics.lambda_accept;
  diag["ess_log_lik"] = res.diagnostics.ess_log_lik;
  diag["ess_xi1"] = res.diagnostics.ess_xi1;
  diag["rhat_log_lik"] = res.diagnostics.rhat_log_lik;
  diag["rhat_xi1"] = res.diagnostics.rhat_xi1;
  diag["eigen_failures"] = res.diagnostics.eigen_failures;
  diag["kept"] = res.diagnostics.kept;

  py::dict out;
  out["grid"] = grid;
  out["p_mean"] = to_vector(summary.mean.values);
  for (const auto& [q, g] : summary.quantiles)
    out[("p_q" + std::to_string(static_cast<int>(q * 100 + 0.5))).c_str()] = to_vector(g.values);
  out["tau"] = tau;
  out["lambda"] = lambda;
  out["log_lik"] = log_lik;
  out["diagnostics"] = diag;
  return out;
}

std::string run_campaign_py(const std::string& config_json) {
  const auto cfg = gpbr::ExperimentConfig::from_json(nlohmann::json::parse(config_json));
  py::gil_scoped_release release;
  return gpbr::run_campaign(cfg).to_json().dump();
}

py::tuple run_acceptance_py(std::uint64_t seed, const std::string& out_dir, int jobs) {
  std::ostringstream log;
  std::vector<gpbr::CriterionResult> results;
  {
    py::gil_scoped_release release;
    results = gpbr::run_acceptance(seed, out_dir, jobs, log);
  }
  py::list items;
  for (const auto& r : results) {
    py::dict d;
    d["number"] = r.number;
    d["pass"] = r.pass;
    d["label"] = r.label;
    d["detail"] = r.detail;
    d["seconds"] = r.seconds;
    items.append(std::move(d));
  }
  return py::make_tuple(items, log.str());
}

py::tuple gp_sample_py(std::uint64_t seed, int grid_points, double tau, double lam,
                       int derivative_order) {
  const gpbr::CovarianceSpec spec("squared-exponential", tau, lam, 1);
  const gpbr::Grid grid = gpbr::Grid::uniform(0.0, 1.0, grid_points);
  Eigen::VectorXd values;
  {
    py::gil_scoped_release release;
    gpbr::GaussianSampler sampler(spec, grid, gpbr::MultiIndex({derivative_order}));
    auto rng = gpbr::make_stream(seed, "gp-sample");
    values = sampler.draw_values(rng);
  }
  std::vector<double> x;
  for (const auto& pt : grid.points()) x.push_back(pt[0]);
  return py::make_tuple(x, to_vector(values));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian process binary regression: samplers, posterior chain, verification campaigns";

  m.def("version", [] { return std::string("0.1.0"); });

  m.def(
      "kernel_value",
      [](double s, double t, double tau, double lam) {
        const gpbr::CovarianceSpec spec("squared-exponential", tau, lam, 1);
        const double ps[1] = {s}, pt[1] = {t};
        return spec.evaluate(ps, pt);
      },
      py::arg("s"), py::arg("t"), py::arg("tau") = 1.0, py::arg("lam") = 1.0,
      "Scaled covariance tau^-1 sigma0(lam s, lam t)");

  m.def(
      "link_forward",
      [](const std::string& name, double u) { return gpbr::LinkFunction::by_name(name)(u); },
      py::arg("name"), py::arg("u"));
  m.def(
      "link_inverse",
      [](const std::string& name, double p) {
        return gpbr::LinkFunction::by_name(name).inverse(p);
      },
      py::arg("name"), py::arg("p"));

  m.def(
      "rkhs_norm_sq",
      [](const std::vector<double>& nodes, const std::vector<double>& coeffs, double lam) {
        return gpbr::rkhs_norm_sq(make_element(nodes, coeffs, lam));
      },
      py::arg("nodes"), py::arg("coeffs"), py::arg("lam") = 1.0,
      "Squared native-space norm of sum_i c_i k(x_i, .)");

  m.def(
      "rkhs_evaluate",
      [](const std::vector<double>& nodes, const std::vector<double>& coeffs, double lam,
         const std::vector<double>& xs) {
        const gpbr::RkhsElement e = make_element(nodes, coeffs, lam);
        std::vector<double> out;
        out.reserve(xs.size());
        for (double v : xs) out.push_back(e.evaluate(gpbr::Point{v}));
        return out;
      },
      py::arg("nodes"), py::arg("coeffs"), py::arg("lam"), py::arg("xs"));

  m.def(
      "bernstein",
      [](const std::function<double(double)>& h, int k, double x) {
        return gpbr::bernstein(h, k, x);
      },
      py::arg("h"), py::arg("k"), py::arg("x"),
      "Cell-averaged Bernstein polynomial of h at x");

  m.def("gp_sample", &gp_sample_py, py::arg("seed"), py::arg("grid_points") = 65,
        py::arg("tau") = 1.0, py::arg("lam") = 1.0, py::arg("derivative_order") = 0,
        "Exact Gaussian path (or path derivative) on a uniform grid; returns (x, values)");

  m.def("simulate", &simulate_py, py::arg("n"), py::arg("seed") = 20260816,
        py::arg("nodes") = std::vector<double>{0.15, 0.5, 0.85},
        py::arg("coeffs") = std::vector<double>{1.9, -1.6, 1.7}, py::arg("lam") = 1.0,
        py::arg("link") = "logistic", py::arg("distribution") = "uniform",
        py::arg("sort") = false,
        "Bernoulli responses at random covariates; returns {x, y, p0}");

  m.def("fit", &fit_py, py::arg("x"), py::arg("y"), py::arg("iters") = 2000,
        py::arg("burn") = 500, py::arg("seed") = 20260816, py::arg("grid_points") = 64,
        py::arg("truncation") = 30, py::arg("link") = "logistic",
        py::arg("fixed_tau") = std::nullopt, py::arg("fixed_lambda") = std::nullopt,
        "Posterior chain over (xi, tau, lambda); returns summary curves, chains, diagnostics");

  m.def("known_campaigns", [] { return gpbr::ExperimentConfig::known_campaigns(); });
  m.def(
      "campaign_defaults",
      [](const std::string& id) { return gpbr::ExperimentConfig::defaults(id).to_json().dump(); },
      py::arg("id"), "Default configuration for a campaign, as a JSON string");
  m.def("run_campaign", &run_campaign_py, py::arg("config_json"),
        "Run one verification campaign from a JSON config; returns the report as JSON");
  m.def("run_acceptance", &run_acceptance_py, py::arg("seed") = 20260816,
        py::arg("out_dir") = std::string("acceptance-out"), py::arg("jobs") = 1,
        "Run all campaigns and the acceptance criteria; returns (criteria, log)");
}
