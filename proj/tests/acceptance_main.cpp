// Acceptance gate: runs every campaign at its default settings and prints one
// verdict line per criterion. Exit status is 0 only when all twelve hold.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "gpbinreg/campaigns.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 20260816;
  std::string out_dir = "acceptance-out";
  int jobs = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> const char* {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--seed")
      seed = std::strtoull(next(), nullptr, 10);
    else if (arg == "--out")
      out_dir = next();
    else if (arg == "--jobs")
      jobs = std::atoi(next());
    else {
      std::cerr << "usage: gpbinreg-acceptance [--seed N] [--out DIR] [--jobs N]\n";
      return 2;
    }
  }

  const auto results = gpbr::run_acceptance(seed, out_dir, jobs, std::cout);
  bool all_pass = true;
  for (const auto& r : results) {
    if (!r.pass) all_pass = false;
    std::printf("[%s] criterion %d: %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.number,
                r.label.c_str(), r.seconds);
  }
  std::printf("%s: %zu/%zu criteria hold\n", all_pass ? "ACCEPTED" : "REJECTED",
              static_cast<std::size_t>(std::count_if(results.begin(), results.end(),
                                                     [](const auto& r) { return r.pass; })),
              results.size());
  return all_pass ? 0 : 1;
}
