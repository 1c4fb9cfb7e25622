#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gpbr {

/// A reproducible experiment description: campaign id, explicit seed,
/// replicate count, and campaign-specific numeric knobs. No field defaults to
/// wall-clock or machine state.
struct ExperimentConfig {
  std::string campaign;
  std::uint64_t seed = 20260816;
  int replicates = 1;
  int jobs = 1;
  std::string out_dir;
  nlohmann::json params = nlohmann::json::object();

  static const std::vector<std::string>& known_campaigns();
  static ExperimentConfig defaults(const std::string& campaign);
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(const nlohmann::json& j);

  nlohmann::json to_json() const;
  std::string hash() const;  // FNV-1a over the canonical dump, hex

  double param(const std::string& key) const;
  void validate() const;
};

struct ReplicateRecord {
  int index = 0;
  bool ok = true;
  std::string note;
  std::map<std::string, double> metrics;
};

struct CampaignReport {
  std::string schema;  // "<campaign>/v1"
  std::string campaign;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t root_seed = 0;
  std::vector<ReplicateRecord> replicates;
  std::map<std::string, double> aggregates;
  bool pass = false;
  std::string detail;

  nlohmann::json to_json() const;
};

CampaignReport run_campaign(const ExperimentConfig& config);

/// Writes <campaign>-replicates.csv and <campaign>-report.json under dir.
void emit_report(const CampaignReport& report, const std::string& dir);

/// One acceptance line: criterion number, verdict, and the backing campaign.
struct CriterionResult {
  int number = 0;
  bool pass = false;
  std::string label;
  std::string detail;
  double seconds = 0.0;
};

/// Runs every campaign at acceptance-grade settings and evaluates the twelve
/// acceptance criteria; returns the per-criterion verdicts.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::string& out_dir,
                                            int jobs, std::ostream& log);

}  // namespace gpbr
