#include "doctest.h"
#include "gpbinreg/campaigns.hpp"
#include "gpbinreg/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace gpbr;
namespace fs = std::filesystem;

TEST_SUITE("campaigns") {

TEST_CASE("every known campaign has valid defaults") {
  for (const auto& id : ExperimentConfig::known_campaigns()) {
    ExperimentConfig c = ExperimentConfig::defaults(id);
    CHECK_NOTHROW(c.validate());
    CHECK(c.campaign == id);
    CHECK(c.replicates >= 1);
    CHECK(!c.params.empty());
  }
  CHECK_THROWS(ExperimentConfig::defaults("does-not-exist"));
}

TEST_CASE("validate rejects malformed configs") {
  ExperimentConfig c = ExperimentConfig::defaults("spacing");
  c.replicates = 0;
  CHECK_THROWS(c.validate());
  c = ExperimentConfig::defaults("spacing");
  c.jobs = 0;
  CHECK_THROWS(c.validate());
  c = ExperimentConfig::defaults("spacing");
  c.campaign = "spacingg";
  CHECK_THROWS(c.validate());
}

TEST_CASE("hash covers the science knobs and nothing else") {
  ExperimentConfig a = ExperimentConfig::defaults("hoeffding");
  ExperimentConfig b = a;
  b.jobs = 7;
  b.out_dir = "somewhere/else";
  CHECK(a.hash() == b.hash());

  b = a;
  b.seed = a.seed + 1;
  CHECK(a.hash() != b.hash());

  b = a;
  b.replicates = a.replicates + 1;
  CHECK(a.hash() != b.hash());

  b = a;
  b.params["m"] = 999;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("from_json overlays fields onto campaign defaults") {
  nlohmann::json j = {{"campaign", "spacing"}, {"seed", 77}, {"params", {{"n", 123}}}};
  ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.seed == 77);
  CHECK(c.param("n") == 123.0);
  // untouched knobs keep their defaults
  CHECK(c.param("k1") == ExperimentConfig::defaults("spacing").param("k1"));
  CHECK(c.replicates == ExperimentConfig::defaults("spacing").replicates);

  CHECK_THROWS(ExperimentConfig::from_json(nlohmann::json{{"seed", 1}}));
  CHECK_THROWS(c.param("no-such-knob"));
}

TEST_CASE("seed derivation separates labels and indices") {
  CHECK(derive_seed(42, "alpha", 0) == derive_seed(42, "alpha", 0));
  CHECK(derive_seed(42, "alpha", 0) != derive_seed(42, "alpha", 1));
  CHECK(derive_seed(42, "alpha", 0) != derive_seed(42, "beta", 0));
  CHECK(derive_seed(42, "alpha", 0) != derive_seed(43, "alpha", 0));

  RngEngine r1 = make_stream(8, "stream", 3);
  RngEngine r2 = make_stream(8, "stream", 3);
  for (int i = 0; i < 16; ++i) CHECK(r1() == r2());
}

TEST_CASE("worker count never changes campaign output") {
  ExperimentConfig c = ExperimentConfig::defaults("spacing");
  c.jobs = 1;
  CampaignReport serial = run_campaign(c);
  c.jobs = 3;
  CampaignReport threaded = run_campaign(c);
  CHECK(serial.to_json().dump() == threaded.to_json().dump());
  CHECK(serial.replicates.size() == 200);
}

TEST_CASE("emitted reports round-trip") {
  CampaignReport rep;
  rep.schema = "spacing/v1";
  rep.campaign = "spacing";
  rep.config = ExperimentConfig::defaults("spacing").to_json();
  rep.config_hash = ExperimentConfig::defaults("spacing").hash();
  rep.root_seed = 5;
  rep.pass = true;
  rep.detail = "synthetic";
  ReplicateRecord r;
  r.index = 0;
  r.metrics["value"] = 0.1 + 0.2;  // prints as 0.30000000000000004
  rep.replicates.push_back(r);

  const fs::path dir = fs::temp_directory_path() / "gpbr-unit-emit";
  emit_report(rep, dir.string());

  std::ifstream jf(dir / "spacing-report.json");
  REQUIRE(jf.good());
  nlohmann::json back = nlohmann::json::parse(jf);
  CHECK(back.at("schema") == "spacing/v1");
  CHECK(back.at("config_hash") == rep.config_hash);
  CHECK(back.at("replicates").size() == 1);

  std::ifstream cf(dir / "spacing-replicates.csv");
  REQUIRE(cf.good());
  std::string header, columns, row;
  std::getline(cf, header);
  std::getline(cf, columns);
  std::getline(cf, row);
  CHECK(header.find("schema=spacing/v1") != std::string::npos);
  CHECK(header.find("config=" + rep.config_hash) != std::string::npos);
  CHECK(columns == "replicate,ok,value");
  // metric text must re-parse to the exact stored double
  const std::string cell = row.substr(row.rfind(',') + 1);
  CHECK(std::strtod(cell.c_str(), nullptr) == 0.1 + 0.2);
}

}  // TEST_SUITE
