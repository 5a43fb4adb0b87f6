// Acceptance binary: one pass/fail line per criterion 1-12 on the flat and
// graph geometries. Thresholds are pinned in codim/verify.hpp.

#include <cstdio>
#include <exception>
#include <string>

#include "codim/config.hpp"
#include "codim/verify.hpp"

#ifndef CODIM_ACCEPTANCE_CONFIG
#define CODIM_ACCEPTANCE_CONFIG "configs/acceptance.yaml"
#endif

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : CODIM_ACCEPTANCE_CONFIG;
  try {
    const codim::ExperimentConfig cfg = codim::load_config(path);
    std::printf("acceptance: %s\n", path.c_str());
    const codim::VerifyReport r = codim::run_verify(cfg, codim::Suite::All, [](const codim::Criterion& c) {
      std::printf("%s\n", codim::format_criterion(c).c_str());
      std::fflush(stdout);
    });
    int failed = 0;
    for (const auto& c : r.criteria) failed += c.status() == codim::CheckStatus::Fail;
    std::printf("acceptance: %zu criteria, %d failed\n", r.criteria.size(), failed);
    return r.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
