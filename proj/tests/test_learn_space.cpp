#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "ecogvoice/error.hpp"
#include "ecogvoice/learn/folds.hpp"
#include "ecogvoice/learn/hyperspace.hpp"
#include "ecogvoice/learn/metrics.hpp"
#include "ecogvoice/learn/tpe.hpp"

using namespace ecogvoice;
using namespace ecogvoice::learn;

namespace {

features::Dataset toy_dataset(int n_high, int n_low, int rows_each) {
  features::Dataset ds;
  ds.feature_names = {"a"};
  const int n = (n_high + n_low) * rows_each;
  ds.x = Eigen::MatrixXd::Zero(n, 1);
  for (int p = 0; p < n_high + n_low; ++p)
    for (int r = 0; r < rows_each; ++r) {
      ds.participant.push_back("p" + std::to_string(100 + p));
      ds.question.push_back("q" + std::to_string(r));
      ds.y.push_back(p < n_high ? 1 : 0);
      ds.ecog.push_back(p < n_high ? 2.5 : 1.2);
    }
  return ds;
}

}  // namespace

TEST(Metrics, PaperBestRow) {
  Confusion c{28, 4, 14, 8};
  auto m = compute_metrics(c);
  EXPECT_DOUBLE_EQ(round1(m.accuracy), 77.8);
  EXPECT_DOUBLE_EQ(round1(m.sensitivity), 87.5);
  EXPECT_DOUBLE_EQ(round1(m.specificity), 63.6);
  EXPECT_DOUBLE_EQ(round1(m.f1), 82.4);
}

TEST(Metrics, ZeroDenominatorsAreNan) {
  auto m = compute_metrics(Confusion{0, 0, 5, 0});
  EXPECT_TRUE(std::isnan(m.sensitivity));
  EXPECT_DOUBLE_EQ(m.specificity, 100.0);
  EXPECT_TRUE(std::isnan(m.f1));
}

TEST(Metrics, ConfusionFromLabels) {
  std::vector<int> t{1, 1, 0, 0, 1}, p{1, 0, 0, 1, 1};
  auto c = confusion(t, p);
  EXPECT_EQ(c, (Confusion{2, 1, 1, 1}));
  EXPECT_EQ(confusion_from_json(to_json(c)), c);
}

TEST(Metrics, Round1HalfAwayFromZero) {
  EXPECT_DOUBLE_EQ(round1(0.25), 0.3);
  EXPECT_DOUBLE_EQ(round1(77.77777), 77.8);
}

TEST(Space, TableOneDomains) {
  EXPECT_EQ(model_space(Algorithm::knn).find("n_neighbors")->hi, 20.0);
  EXPECT_TRUE(model_space(Algorithm::logreg).find("C")->is_log());
  EXPECT_EQ(model_space(Algorithm::gbt_a).params.size(), 14u);
  EXPECT_EQ(model_space(Algorithm::gbt_b).find("num_leaves")->lo, 10.0);
  EXPECT_EQ(joint_space(Algorithm::svm).params.size(), 5u);
  for (auto a : all_algorithms()) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_THROW(parse_algorithm("forest"), std::invalid_argument);
}

TEST(Space, RandomSamplesStayInDomain) {
  Rng rng(5);
  for (auto a : all_algorithms()) {
    auto space = joint_space(a);
    for (int i = 0; i < 200; ++i) {
      auto c = sample_random(space, rng);
      EXPECT_TRUE(space.contains(c)) << to_string(a);
    }
  }
}

TEST(Space, JsonRoundTrip) {
  Rng rng(2);
  auto c = sample_random(joint_space(Algorithm::gbt_a), rng);
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), DataError);
}

TEST(Tpe, SuggestionsInDomainAndDeterministic) {
  auto space = joint_space(Algorithm::gbt_b);
  auto objective = [](const HyperConfig& c, int) { return std::abs(get_number(c, "feature_fraction") - 0.3); };
  auto a = tpe_minimize(space, objective, 30, 17);
  auto b = tpe_minimize(space, objective, 30, 17);
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(space.contains(a[i].config));
    EXPECT_EQ(a[i].config, b[i].config);
  }
}

TEST(Tpe, QuadraticOptimum) {
  HyperSpace space;
  space.params = {ParamDomain{"x", ParamKind::uniform, 0.0, 10.0, {}}};
  auto trials = tpe_minimize(
      space, [](const HyperConfig& c, int) { return std::pow(get_number(c, "x") - 3.0, 2); }, 60, 3);
  EXPECT_NEAR(get_number(trials[best_trial(trials)].config, "x"), 3.0, 0.3);
}

TEST(Tpe, CategoricalConverges) {
  HyperSpace space;
  space.params = {ParamDomain{"c", ParamKind::categorical, 0, 0, {std::string("a"), std::string("b"), std::string("c")}}};
  auto trials = tpe_minimize(
      space, [](const HyperConfig& c, int) { return get_string(c, "c") == "b" ? 0.0 : 1.0; }, 40, 1);
  int late_b = 0;
  for (std::size_t i = 20; i < trials.size(); ++i) late_b += get_string(trials[i].config, "c") == "b";
  EXPECT_GE(late_b, 14);
}

TEST(Tpe, BestTrialEarliestTie) {
  std::vector<Trial> t{{{}, 1.0}, {{}, 0.5}, {{}, 0.5}};
  EXPECT_EQ(best_trial(t), 1u);
}

TEST(Folds, SubjectWiseStratifiedPartition) {
  auto ds = toy_dataset(32, 22, 5);
  auto plan = make_fold_plan(ds, 42);
  ASSERT_EQ(plan.n_outer(), 10u);
  plan.validate(ds);
  std::set<std::string> seen;
  for (const auto& f : plan.outer) {
    int highs = 0;
    for (const auto& p : f) {
      EXPECT_TRUE(seen.insert(p).second);
      highs += std::stoi(p.substr(1)) < 132;
    }
    EXPECT_GE(highs, 3);
    EXPECT_LE(highs, 4);
    EXPECT_GE(f.size(), 5u);
    EXPECT_LE(f.size(), 6u);
  }
  EXPECT_EQ(seen.size(), 54u);
  for (std::size_t o = 0; o < 10; ++o) {
    ASSERT_EQ(plan.inner[o].size(), 3u);
    std::size_t n = 0;
    for (const auto& part : plan.inner[o]) n += part.size();
    EXPECT_EQ(n, 54u - plan.outer[o].size());
  }
}

TEST(Folds, SeedDeterministicAndJsonRoundTrip) {
  auto ds = toy_dataset(10, 10, 2);
  auto a = make_fold_plan(ds, 7), b = make_fold_plan(ds, 7), c = make_fold_plan(ds, 8);
  EXPECT_EQ(a.outer, b.outer);
  EXPECT_NE(a.outer, c.outer);
  auto back = FoldPlan::from_json(a.to_json());
  EXPECT_EQ(back.outer, a.outer);
  EXPECT_EQ(back.inner, a.inner);
}

TEST(Folds, Errors) {
  EXPECT_THROW(make_fold_plan(toy_dataset(4, 4, 1), 1), DataError);
  EXPECT_THROW(make_fold_plan(toy_dataset(12, 0, 1), 1), DataError);
  auto ds = toy_dataset(10, 10, 2);
  ds.y[1] = 0;  // participant p100 now has disagreeing rows
  EXPECT_THROW(participant_labels(ds), DataError);
  auto plan = make_fold_plan(toy_dataset(10, 10, 2), 1);
  plan.outer[0].push_back(plan.outer[1][0]);
  EXPECT_THROW(plan.validate(toy_dataset(10, 10, 2)), DataError);
}
