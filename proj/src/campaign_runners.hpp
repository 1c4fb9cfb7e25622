#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "gpbinreg/campaigns.hpp"

// Campaign entry points, one per id. Each fills replicates, aggregates, pass,
// and detail; the framework in campaigns.cpp owns config echo, hashing, and
// emission. Runners must derive every RNG stream from config.seed.
namespace gpbr::runs {

/// Runs fn(0..count-1), fanning out over jobs threads. fn must seed itself
/// from its index and write only to index-addressed slots, which keeps the
/// output identical for every jobs value.
template <typename Fn>
void parallel_replicates(int count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, count);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

void kl_truncation(const ExperimentConfig&, CampaignReport&);
void derivative_tails(const ExperimentConfig&, CampaignReport&);
void small_ball(const ExperimentConfig&, CampaignReport&);
void sieve_mass(const ExperimentConfig&, CampaignReport&);
void entropy(const ExperimentConfig&, CampaignReport&);
void hoeffding(const ExperimentConfig&, CampaignReport&);
void bernstein(const ExperimentConfig&, CampaignReport&);
void spacing(const ExperimentConfig&, CampaignReport&);
void posterior_oracle(const ExperimentConfig&, CampaignReport&);
void consistency(const ExperimentConfig&, CampaignReport&);  // theorem1/2/3

}  // namespace gpbr::runs
