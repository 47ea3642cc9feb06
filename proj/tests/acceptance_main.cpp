// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Usage: acceptance [criterion ids...] [--scale s] [--seed s] [-v]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ams/acceptance.hpp"

int main(int argc, char** argv) {
  ams::acceptance::Options opt;
  std::vector<int> ids;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--scale" && i + 1 < argc) {
      opt.scale = std::atof(argv[++i]);
    } else if (arg == "--seed" && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "-v") {
      verbose = true;
    } else {
      ids.push_back(std::atoi(arg.c_str()));
    }
  }
  if (ids.empty())
    for (int id = 1; id <= 12; ++id) ids.push_back(id);

  int failures = 0;
  for (int id : ids) {
    const auto c = ams::acceptance::run_criterion(id, opt);
    std::printf("criterion %2d: %s  %s  (%.1fs)\n", c.id, c.pass() ? "PASS" : "FAIL",
                c.title.c_str(), c.seconds);
    for (const auto& r : c.reports) {
      if (!verbose && r.pass) continue;
      std::printf("    %-28s %s stat=%.6g threshold=%.6g", r.name.c_str(), r.pass ? "ok  " : "FAIL",
                  r.statistic, r.threshold);
      if (r.p_value) std::printf(" p=%.4g", *r.p_value);
      std::printf("  [%s] %s\n", r.digest.c_str(), r.detail.c_str());
    }
    std::fflush(stdout);
    if (!c.pass()) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ids.size()) - failures, ids.size());
  return failures == 0 ? 0 : 1;
}
