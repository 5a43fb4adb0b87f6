#include <gtest/gtest.h>

#include "codim/verify.hpp"

namespace codim {
namespace {

Check row(CheckStatus s) { return {"flat", "q", 1.0, "<= 2", s, "", false}; }

TEST(Verify, CriterionStatusAggregation) {
  Criterion c;
  EXPECT_EQ(c.status(), CheckStatus::Skipped);
  c.checks = {row(CheckStatus::Pass), row(CheckStatus::Skipped)};
  EXPECT_EQ(c.status(), CheckStatus::Pass);
  c.checks.push_back(row(CheckStatus::Underpowered));
  EXPECT_EQ(c.status(), CheckStatus::Underpowered);
  c.checks.push_back(row(CheckStatus::Fail));
  EXPECT_EQ(c.status(), CheckStatus::Fail);

  VerifyReport r;
  r.criteria = {Criterion{1, "a", {row(CheckStatus::Underpowered)}, 0.0}};
  EXPECT_TRUE(r.passed());
  r.criteria.push_back(Criterion{2, "b", {row(CheckStatus::Fail)}, 0.0});
  EXPECT_FALSE(r.passed());
}

TEST(Verify, FormatLine) {
  const Criterion c{7, "Harnack chains", {row(CheckStatus::Pass)}, 1.5};
  const std::string s = format_criterion(c);
  EXPECT_EQ(s.rfind("[PASS] C7", 0), 0u) << s;
  EXPECT_NE(s.find("Harnack chains"), std::string::npos);
}

// Coarse flat run with 100 paths: the statistical rows must report
// UNDERPOWERED rather than pass or fail, and the deterministic oracle rows
// still run.
TEST(Verify, SmallEnsembleIsUnderpowered) {
  ExperimentConfig cfg;
  cfg.grid = GridSpec{2.0, 1.0 / 16.0, 0.0};
  cfg.walker.paths = 100;
  cfg.walker.params.dt0 = 0.01;
  cfg.walker.params.eps_abs = 1e-3;
  std::vector<int> seen;
  const VerifyReport r = run_verify(cfg, Suite::Flat, [&](const Criterion& c) { seen.push_back(c.id); });
  ASSERT_EQ(r.criteria.size(), 12u);
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(r.criteria[1].id, 2);
  EXPECT_EQ(r.criteria[1].status(), CheckStatus::Underpowered);
  EXPECT_EQ(r.criteria[11].status(), CheckStatus::Underpowered);
  EXPECT_EQ(r.criteria[0].status(), CheckStatus::Pass);
  EXPECT_EQ(r.criteria[7].status(), CheckStatus::Pass);
  for (const Check& k : r.criteria[0].checks) EXPECT_EQ(k.geometry, "flat");
}

}  // namespace
}  // namespace codim
