#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gpbinreg/binary_model.hpp"
#include "gpbinreg/campaigns.hpp"
#include "gpbinreg/posterior.hpp"
#include "gpbinreg/rkhs.hpp"
#include "gpbinreg/rng.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

gpbr::DesignSpec parse_design(const json& j) {
  gpbr::DesignSpec d;
  const std::string kind = j.value("kind", "random_q");
  if (kind == "random_q")
    d.kind = gpbr::DesignKind::random_q;
  else if (kind == "fixed_grid")
    d.kind = gpbr::DesignKind::fixed_grid;
  else if (kind == "fixed_custom")
    d.kind = gpbr::DesignKind::fixed_custom;
  else
    throw std::invalid_argument("unknown design kind: " + kind);
  const std::string dist = j.value("distribution", "uniform");
  if (dist == "uniform")
    d.q = gpbr::CovariateDistribution::uniform;
  else if (dist == "beta")
    d.q = gpbr::CovariateDistribution::beta_2_5;
  else
    throw std::invalid_argument("unknown covariate distribution: " + dist);
  d.dim = j.value("dim", 1);
  d.lo = j.value("lo", 0.0);
  d.hi = j.value("hi", 1.0);
  d.sort_covariates = j.value("sort", false);
  if (j.contains("custom"))
    for (const auto& pt : j.at("custom")) d.custom.push_back(pt.get<gpbr::Point>());
  return d;
}

gpbr::RkhsElement parse_element(const json& j) {
  std::vector<gpbr::Point> nodes;
  for (const auto& n : j.at("nodes")) {
    if (n.is_array())
      nodes.push_back(n.get<gpbr::Point>());
    else
      nodes.push_back(gpbr::Point{n.get<double>()});
  }
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(nodes.size()));
  Eigen::Index i = 0;
  for (const auto& c : j.at("coefficients")) coeffs[i++] = c.get<double>();
  return gpbr::RkhsElement(gpbr::make_kernel(j.value("kernel", "squared-exponential")),
                           j.value("lambda", 1.0), std::move(nodes), std::move(coeffs));
}

gpbr::PriorSpec parse_prior(const json& j) {
  gpbr::PriorSpec prior;
  prior.kernel_family = j.value("kernel", "squared-exponential");
  prior.grid = gpbr::Grid::uniform(j.value("grid_lo", 0.0), j.value("grid_hi", 1.0),
                                   j.value("grid_points", 64), j.value("dim", 1));
  prior.truncation = j.value("truncation", 30);
  prior.link = gpbr::LinkFunction::by_name(j.value("link", "logistic"));
  prior.ladder_rungs = j.value("ladder_rungs", 64);
  prior.ladder_lo = j.value("ladder_lo", 0.05);
  prior.ladder_hi = j.value("ladder_hi", 6.0);
  prior.elliptical_xi = j.value("elliptical", true);
  if (j.contains("fixed_tau") && !j.at("fixed_tau").is_null())
    prior.fixed_tau = j.at("fixed_tau").get<double>();
  if (j.contains("fixed_lambda") && !j.at("fixed_lambda").is_null())
    prior.fixed_lambda = j.at("fixed_lambda").get<double>();
  if (j.contains("mean") && !j.at("mean").is_null()) prior.mean = parse_element(j.at("mean"));
  if (j.contains("tau_prior")) {
    prior.tau_prior.shape = j.at("tau_prior").value("shape", 2.0);
    prior.tau_prior.scale = j.at("tau_prior").value("scale", 1.0);
  }
  if (j.contains("lambda_prior")) {
    const auto& lp = j.at("lambda_prior");
    const std::string kind = lp.value("kind", "log1p-exponential");
    prior.lambda_prior.kind = kind == "gamma" ? gpbr::LambdaPrior::Kind::gamma
                                              : gpbr::LambdaPrior::Kind::log1p_exponential;
    prior.lambda_prior.rate = lp.value("rate", 1.0);
    prior.lambda_prior.shape = lp.value("shape", 2.0);
    prior.lambda_prior.scale = lp.value("scale", 1.0);
  }
  return prior;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const json cfg = config_path.empty() ? json{{"n", 200}} : load_json(config_path);
  const auto n = cfg.value("n", 200);
  const gpbr::DesignSpec design =
      cfg.contains("design") ? parse_design(cfg.at("design")) : gpbr::DesignSpec{};
  json truth_cfg = cfg.contains("truth")
                       ? cfg.at("truth")
                       : json{{"lambda", 1.0},
                              {"nodes", {0.15, 0.5, 0.85}},
                              {"coefficients", {1.9, -1.6, 1.7}}};
  const gpbr::RkhsElement eta0 = parse_element(truth_cfg);
  const gpbr::LinkFunction link = gpbr::LinkFunction::by_name(cfg.value("link", "logistic"));

  auto rng = gpbr::make_stream(seed, "simulate");
  const gpbr::Dataset data = gpbr::simulate(gpbr::response_function(eta0, link), design,
                                            static_cast<std::size_t>(n), rng);

  std::filesystem::create_directories(out);
  {
    std::ofstream os(std::filesystem::path(out) / "dataset.csv");
    data.to_csv(os);
  }
  {
    json echo;
    echo["seed"] = seed;
    echo["n"] = n;
    echo["link"] = link.name();
    echo["truth"] = truth_cfg;
    if (cfg.contains("design")) echo["design"] = cfg.at("design");
    std::ofstream os(std::filesystem::path(out) / "truth.json");
    os << echo.dump(2) << "\n";
  }
  std::cout << "wrote " << n << " observations to " << out << "/dataset.csv\n";
  return 0;
}

int cmd_fit(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const json cfg = load_json(config_path);
  gpbr::Dataset data;
  {
    std::ifstream is(cfg.at("data").get<std::string>());
    if (!is) throw std::runtime_error("cannot open dataset: " + cfg.at("data").get<std::string>());
    data = gpbr::Dataset::from_csv(is);
  }
  const gpbr::PriorSpec prior =
      cfg.contains("prior") ? parse_prior(cfg.at("prior")) : gpbr::PriorSpec{};
  const auto iters = cfg.value("iters", std::size_t{2000});
  const auto burn = cfg.value("burn", std::size_t{500});

  auto rng = gpbr::make_stream(seed, "fit");
  const gpbr::ChainResult res = gpbr::run_chain(prior, data, iters, burn, rng);

  std::filesystem::create_directories(out);
  {
    std::ofstream os(std::filesystem::path(out) / "draws.csv");
    os << "# schema=fit-draws/v1 seed=" << seed << "\n";
    os << "draw,tau,lambda,log_lik";
    const auto N = res.draws.front().xi.size();
    for (Eigen::Index k = 0; k < N; ++k) os << ",xi" << (k + 1);
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < res.draws.size(); ++i) {
      const auto& d = res.draws[i];
      os << i;
      const auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        os << buf;
      };
      put(d.tau);
      put(d.lambda);
      put(d.log_lik);
      for (Eigen::Index k = 0; k < N; ++k) put(d.xi[k]);
      os << "\n";
    }
  }
  {
    const gpbr::PosteriorSummary summary = gpbr::posterior_summary(res.draws, {0.1, 0.5, 0.9});
    json js;
    js["seed"] = seed;
    js["iters"] = iters;
    js["burn"] = burn;
    js["kept"] = res.diagnostics.kept;
    js["diagnostics"] = {{"ess_log_lik", res.diagnostics.ess_log_lik},
                         {"ess_xi1", res.diagnostics.ess_xi1},
                         {"rhat_log_lik", res.diagnostics.rhat_log_lik},
                         {"rhat_xi1", res.diagnostics.rhat_xi1},
                         {"tau_accept", res.diagnostics.tau_accept},
                         {"lambda_accept", res.diagnostics.lambda_accept},
                         {"eigen_failures", res.diagnostics.eigen_failures}};
    json grid_pts = json::array();
    for (const auto& p : prior.grid.points()) grid_pts.push_back(p[0]);
    js["grid"] = grid_pts;
    js["p_mean"] = std::vector<double>(summary.mean.values.data(),
                                       summary.mean.values.data() + summary.mean.values.size());
    for (const auto& [q, g] : summary.quantiles) {
      js["p_q" + std::to_string(static_cast<int>(q * 100))] =
          std::vector<double>(g.values.data(), g.values.data() + g.values.size());
    }
    std::ofstream os(std::filesystem::path(out) / "summary.json");
    os << js.dump(2) << "\n";
  }
  std::cout << "kept " << res.diagnostics.kept << " draws; summary in " << out
            << "/summary.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process binary regression laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 20260816;
  int replicates = -1, jobs = 1;

  auto* sim = app.add_subcommand("simulate", "draw a synthetic binary regression dataset");
  sim->add_option("--config", config_path, "JSON design/truth description");
  sim->add_option("--seed", seed, "root RNG seed");
  sim->add_option("--out", out_dir, "output directory");

  auto* fit = app.add_subcommand("fit", "run the posterior chain on a dataset");
  fit->add_option("--config", config_path, "JSON fit description")->required();
  fit->add_option("--seed", seed, "root RNG seed");
  fit->add_option("--out", out_dir, "output directory");

  std::string campaign_id;
  auto* camp = app.add_subcommand("campaign", "run one verification campaign");
  camp->add_option("id", campaign_id, "campaign id")->required();
  camp->add_option("--config", config_path, "JSON config overriding campaign defaults");
  camp->add_option("--seed", seed, "root RNG seed");
  camp->add_option("--out", out_dir, "output directory");
  camp->add_option("--replicates", replicates, "replicate count override");
  camp->add_option("--jobs", jobs, "worker threads (never changes results)");

  auto* verify = app.add_subcommand("verify-all", "run every campaign and the acceptance gates");
  verify->add_option("--seed", seed, "root RNG seed");
  verify->add_option("--out", out_dir, "output directory");
  verify->add_option("--jobs", jobs, "worker threads (never changes results)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_dir);
    if (fit->parsed()) return cmd_fit(config_path, seed, out_dir);
    if (camp->parsed()) {
      gpbr::ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = gpbr::ExperimentConfig::from_file(config_path);
        if (cfg.campaign != campaign_id)
          throw std::invalid_argument("config file is for campaign " + cfg.campaign);
      } else {
        cfg = gpbr::ExperimentConfig::defaults(campaign_id);
      }
      if (camp->count("--seed")) cfg.seed = seed;
      if (camp->count("--out")) cfg.out_dir = out_dir;
      if (replicates > 0) cfg.replicates = replicates;
      cfg.jobs = jobs;
      const gpbr::CampaignReport report = gpbr::run_campaign(cfg);
      gpbr::emit_report(report, cfg.out_dir);
      std::cout << report.campaign << ": " << (report.pass ? "pass" : "FAIL") << " ("
                << report.detail << ")\n";
      std::cout << "report: " << cfg.out_dir << "/" << report.campaign << "-report.json\n";
      return report.pass ? 0 : 1;
    }
    // verify-all
    const auto results = gpbr::run_acceptance(seed, out_dir, jobs, std::cout);
    bool all = true;
    for (const auto& r : results) {
      std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.number << ": " << r.label
                << "\n";
      if (!r.pass) all = false;
    }
    std::cout << (all ? "all criteria hold\n" : "at least one criterion failed\n");
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
