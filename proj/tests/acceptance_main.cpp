// Acceptance runner: one pass/fail line per criterion. Exit code 0 only if
// every selected criterion passes. Also reachable through `pspin verify`.
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "pspin/accept.hpp"

int main(int argc, char** argv) {
  using namespace pspin::accept;
  Level level = Level::full;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--level") == 0 && i + 1 < argc) {
      const std::string v = argv[++i];
      if (v == "quick") level = Level::quick;
      else if (v == "full") level = Level::full;
      else {
        std::fprintf(stderr, "unknown level '%s' (quick|full)\n", v.c_str());
        return 2;
      }
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.emplace_back(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--level quick|full] [--only A<k>]...\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  const auto results = run_acceptance(level, only, [&](const CriterionResult& r) {
    all_pass = all_pass && r.pass;
    std::printf("%-4s %s (%.1f s): %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                r.details.c_str());
    std::fflush(stdout);
  });
  if (results.empty()) {
    std::fprintf(stderr, "no matching criteria\n");
    return 2;
  }
  return all_pass ? 0 : 1;
}
