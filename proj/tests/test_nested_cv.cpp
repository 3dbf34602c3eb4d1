#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "ecogvoice/error.hpp"
#include "ecogvoice/learn/nested_cv.hpp"
#include "ecogvoice/learn/report.hpp"
#include "toy.hpp"

using namespace ecogvoice;
using namespace ecogvoice::learn;

namespace {

NestedCvConfig small(int jobs = 1) {
  NestedCvConfig cfg;
  cfg.budget = 4;
  cfg.seed = 3;
  cfg.jobs = jobs;
  cfg.tpe.n_startup = 2;
  cfg.boruta.max_iter = 20;
  return cfg;
}

}  // namespace

TEST(Folds, PartitionParticipants) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 7);
  ASSERT_EQ(plan.n_outer(), 10u);
  std::set<std::string> seen;
  for (std::size_t f = 0; f < plan.n_outer(); ++f) {
    for (auto& p : plan.outer[f]) EXPECT_TRUE(seen.insert(p).second);
    std::size_t inner = 0;
    for (auto& part : plan.inner[f]) inner += part.size();
    EXPECT_EQ(inner + plan.outer[f].size(), 20u);
  }
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_NO_THROW(plan.validate(ds));
}

TEST(Folds, ValidateCatchesTampering) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 7);
  plan.outer[0].push_back(plan.outer[1][0]);
  EXPECT_THROW(plan.validate(ds), DataError);
}

TEST(Folds, PlanJsonRoundTrip) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 11);
  auto back = FoldPlan::from_json(plan.to_json());
  EXPECT_EQ(back.outer, plan.outer);
  EXPECT_EQ(back.inner, plan.inner);
  EXPECT_EQ(back.seed, plan.seed);
}

TEST(Folds, RowsOfAreAscending) {
  auto ds = toy::dataset();
  auto rows = rows_of(ds, {"P105", "P101"});
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
  EXPECT_EQ(rows.front(), 5u);
}

TEST(NestedCv, NoTestRowsLeakBeforeEvaluation) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 2);
  LeakageAudit audit(ds, plan);
  auto cfg = small();
  cfg.auditor = &audit;
  auto rep = nested_cv(ds, Algorithm::logreg, plan, cfg);
  EXPECT_EQ(audit.violations(), 0u);
  bool evaluated = false;
  for (auto& e : audit.to_json()) {
    if (e["phase"] == "evaluation") {
      evaluated = true;
      EXPECT_GT(e["test_rows_read"].get<std::size_t>(), 0u);
    }
  }
  EXPECT_TRUE(evaluated);
  EXPECT_EQ(rep.pooled.n(), static_cast<int>(ds.rows()));
}

TEST(NestedCv, AuditFlagsTestReads) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 2);
  LeakageAudit audit(ds, plan);
  auto rows = rows_of(ds, plan.outer[0]);
  audit.record(0, Phase::standardization, rows);
  EXPECT_EQ(audit.violations(), rows.size());
}

TEST(NestedCv, JobsDoNotChangeResults) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 5);
  auto a = nested_cv(ds, Algorithm::knn, plan, small(1));
  auto b = nested_cv(ds, Algorithm::knn, plan, small(2));
  auto ra = make_report(ds, plan, 5, 4, {a});
  auto rb = make_report(ds, plan, 5, 4, {b});
  EXPECT_EQ(ra.to_json().dump(), rb.to_json().dump());
}

TEST(NestedCv, LearnsSeparableToy) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 5);
  auto rep = nested_cv(ds, Algorithm::logreg, plan, small());
  EXPECT_GT(rep.metrics.accuracy, 80.0);
  for (auto& f : rep.folds) {
    EXPECT_EQ(f.trial_losses.size(), 4u);
    EXPECT_FALSE(f.selected_features.empty());
  }
}

TEST(Report, JsonRoundTripAndTamper) {
  auto ds = toy::dataset();
  auto plan = make_fold_plan(ds, 5);
  auto rep = make_report(ds, plan, 5, 4, {nested_cv(ds, Algorithm::knn, plan, small())});
  auto j = rep.to_json();
  auto back = EvalReport::from_json(j);
  EXPECT_EQ(back.to_json().dump(), j.dump());
  EXPECT_EQ(back.n_participants, 20u);
  EXPECT_NEAR(rep.majority_rate(), 60.0, 1e-9);

  auto path = std::filesystem::temp_directory_path() / "ecogvoice_report_test.json";
  write_json(path, j);
  EXPECT_EQ(read_json(path).dump(), j.dump());
  std::filesystem::remove(path);

  auto bad = j;
  bad["algorithms"][0]["pooled"]["tp"] = bad["algorithms"][0]["pooled"]["tp"].get<int>() + 1;
  EXPECT_THROW(EvalReport::from_json(bad), DataError);
}
