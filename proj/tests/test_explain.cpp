#include <gtest/gtest.h>

#include <random>

#include "ecogvoice/error.hpp"
#include "ecogvoice/explain.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace ecogvoice;
using namespace ecogvoice::explain;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = z(rng);
  return m;
}

Eigen::VectorXd nonlinear(const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    out(r) = std::tanh(x(r, 0) * x(r, 1)) + 0.5 * x(r, 2) * x(r, 2) + 0.8 * x(r, 3) - 0.3 * x(r, 4) * x(r, 5) +
             0.2 * std::sin(x(r, 6));
  return out;
}

}  // namespace

TEST(Shapley, AdditiveModelIsExact) {
  auto x = gaussian(5, 4, 1);
  auto bg = gaussian(20, 4, 2);
  Eigen::Vector4d w(1.0, -2.0, 0.5, 3.0);
  ModelFn f = [&](const Eigen::MatrixXd& m) -> Eigen::VectorXd { return m * w; };
  std::vector<std::size_t> subset{0, 1, 3};
  auto res = shapley_values(f, x, bg, subset, ShapleyConfig{80}, 3);
  auto mean = bg.colwise().mean();
  for (int r = 0; r < 5; ++r) {
    for (int c : {0, 1, 3}) EXPECT_NEAR(res.values(r, c), w(c) * (x(r, c) - mean(c)), 1e-9);
    EXPECT_EQ(res.values(r, 2), 0.0);
  }
}

TEST(Shapley, MatchesBruteForce) {
  auto x = gaussian(30, 8, 4);
  auto bg = gaussian(100, 8, 5);
  std::vector<std::size_t> subset{0, 1, 2, 3, 4, 5, 6};
  auto res = shapley_values(nonlinear, x, bg, subset, ShapleyConfig{200}, 6);
  Eigen::VectorXd est = Eigen::VectorXd::Zero(8), exact = Eigen::VectorXd::Zero(8);
  for (int r = 0; r < 30; ++r) {
    auto phi = oracle::brute_shapley(nonlinear, x.row(r), bg, subset);
    est += res.values.row(r).cwiseAbs().transpose();
    exact += phi.cwiseAbs();
  }
  for (std::size_t c : subset) EXPECT_NEAR(est(c), exact(c), 0.05 * exact(c)) << c;
  EXPECT_EQ(est(7), 0.0);
}

TEST(Shapley, LocalAccuracy) {
  auto x = gaussian(10, 8, 7);
  auto bg = gaussian(100, 8, 8);
  std::vector<std::size_t> subset{0, 1, 2, 3, 4, 5, 6, 7};
  auto res = shapley_values(nonlinear, x, bg, subset, ShapleyConfig{200}, 9);
  EXPECT_NEAR(res.base_value, nonlinear(bg).mean(), 1e-12);
  for (int r = 0; r < 10; ++r) {
    double gap = res.values.row(r).sum() + res.base_value - res.output(r);
    EXPECT_LE(std::abs(gap), 1e-9 + 3.0 * res.local_error_se(r));
  }
  auto odd = shapley_values(nonlinear, x, bg.topRows(37), subset, ShapleyConfig{200}, 9);
  for (int r = 0; r < 10; ++r) {
    double gap = odd.values.row(r).sum() + odd.base_value - odd.output(r);
    EXPECT_GT(odd.local_error_se(r), 0.0);
    EXPECT_LE(std::abs(gap), 4.0 * odd.local_error_se(r));
  }
}

TEST(Shapley, DeterministicAcrossJobs) {
  auto x = gaussian(12, 8, 1);
  auto bg = gaussian(50, 8, 2);
  std::vector<std::size_t> subset{1, 3, 5};
  auto a = shapley_values(nonlinear, x, bg, subset, ShapleyConfig{100}, 4, 1);
  auto b = shapley_values(nonlinear, x, bg, subset, ShapleyConfig{100}, 4, 2);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Shapley, RejectsBadInput) {
  auto x = gaussian(2, 3, 1);
  auto bg = gaussian(4, 3, 2);
  std::vector<std::size_t> subset{0};
  EXPECT_THROW(shapley_values(nonlinear, x, bg, subset, ShapleyConfig{20}, 0), std::exception);
  EXPECT_THROW(shapley_values(nonlinear, x, Eigen::MatrixXd(0, 3), subset, ShapleyConfig{}, 0), std::exception);
  EXPECT_THROW(shapley_values(nonlinear, x, gaussian(4, 2, 2), subset, ShapleyConfig{}, 0), std::exception);
}

TEST(Frequency, CountsFoldsAndFlagsMajority) {
  std::vector<std::vector<std::string>> folds{{"a", "b"}, {"a"}, {"a", "c"}, {"b", "c"}};
  auto freq = selection_frequency(folds, {"a", "b", "c", "d"});
  ASSERT_EQ(freq.size(), 4u);
  EXPECT_EQ(freq[0].name, "a");
  EXPECT_DOUBLE_EQ(freq[0].frequency, 0.75);
  EXPECT_TRUE(freq[0].robust);
  EXPECT_EQ(freq[1].name, "b");
  EXPECT_FALSE(freq[1].robust);
  EXPECT_EQ(freq[2].name, "c");
  EXPECT_EQ(freq[3].name, "d");
  EXPECT_DOUBLE_EQ(freq[3].frequency, 0.0);
}

TEST(Common, FractionsOfImportance) {
  std::vector<std::pair<std::string, double>> ia{{"x", 3.0}, {"y", 1.0}, {"z", 1.0}};
  std::vector<std::pair<std::string, double>> ib{{"y", 2.0}, {"x", 2.0}, {"w", 4.0}};
  auto c = common_features({"x", "y", "z"}, ia, {"y", "x", "w"}, ib);
  EXPECT_EQ(c.common, (std::vector<std::string>{"x", "y"}));
  EXPECT_DOUBLE_EQ(c.fraction_a, 0.8);
  EXPECT_DOUBLE_EQ(c.fraction_b, 0.5);
}

TEST(ExplainReport, RefitsAndAttributesEveryRow) {
  auto ds = toy::dataset();
  auto plan = learn::make_fold_plan(ds, 5);
  learn::NestedCvConfig cv;
  cv.budget = 3;
  cv.seed = 5;
  cv.tpe.n_startup = 2;
  cv.boruta.max_iter = 20;
  learn::SelectionCache cache;
  auto alg = learn::nested_cv(ds, learn::Algorithm::logreg, plan, cv, &cache);
  auto rep = learn::make_report(ds, plan, 5, 3, {alg});
  rep.condition = "cognitive";
  ExplainConfig ec;
  ec.shapley.n_permutations = 60;
  ec.background_rows = 30;
  ec.seed = 2;
  auto imp = explain_report(ds, rep, learn::Algorithm::logreg, cv, ec);
  EXPECT_EQ(imp.shapley.rows(), static_cast<Eigen::Index>(ds.rows()));
  EXPECT_EQ(imp.participants.size(), ds.rows());
  for (Eigen::Index r = 0; r < imp.shapley.rows(); ++r)
    EXPECT_NEAR(imp.shapley.row(r).sum() + imp.base(r), imp.output(r), 1e-8);
  auto rank = imp.ranking();
  EXPECT_TRUE(rank[0].first == "f0" || rank[0].first == "f1");
  auto again = explain_report(ds, rep, learn::Algorithm::logreg, cv, ec);
  EXPECT_EQ(again.to_json().dump(), imp.to_json().dump());

  auto tampered = rep;
  auto& pred = tampered.algorithms[0].folds[0].y_pred;
  pred[0] = 1 - pred[0];
  EXPECT_THROW(explain_report(ds, tampered, learn::Algorithm::logreg, cv, ec), DataError);
}
