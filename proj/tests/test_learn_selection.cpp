#include <gtest/gtest.h>

#include <random>

#include "ecogvoice/learn/binning.hpp"
#include "ecogvoice/learn/boruta.hpp"
#include "ecogvoice/learn/forest.hpp"
#include "ecogvoice/rng.hpp"

using namespace ecogvoice;
using namespace ecogvoice::learn;

namespace {

struct Planted {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Planted planted(std::uint64_t seed, int rows = 200, int cols = 45) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  Planted p{Eigen::MatrixXd(rows, cols), std::vector<int>(rows)};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) p.x(r, c) = z(rng);
    p.y[r] = p.x(r, 0) + p.x(r, 1) + p.x(r, 2) + 0.3 * z(rng) > 0;
  }
  return p;
}

}  // namespace

TEST(Binning, FewDistinctValuesGetOwnBins) {
  Eigen::MatrixXd x(6, 1);
  x << 3, 1, 2, 1, 3, 2;
  auto b = bin_matrix(x, 16);
  EXPECT_EQ(b.bins(0), 3);
  EXPECT_EQ(b.code(1, 0), b.code(3, 0));
  EXPECT_LT(b.code(1, 0), b.code(2, 0));
  EXPECT_LT(b.code(2, 0), b.code(0, 0));
}

TEST(Binning, ThresholdsAreUpperInclusive) {
  Eigen::MatrixXd x(100, 1);
  for (int i = 0; i < 100; ++i) x(i, 0) = i;
  auto b = bin_matrix(x, 8);
  EXPECT_LE(b.bins(0), 8);
  for (int i = 0; i < 100; ++i) {
    int code = b.code(i, 0);
    EXPECT_EQ(code, bin_of(b.thresholds[0], x(i, 0)));
    if (code > 0) EXPECT_GT(x(i, 0), b.thresholds[0][code - 1]);
    if (code < b.bins(0) - 1) EXPECT_LE(x(i, 0), b.thresholds[0][code]);
  }
}

TEST(Binning, RejectsBadBinCount) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 2);
  EXPECT_THROW(bin_matrix(x, 1), std::exception);
  EXPECT_THROW(bin_matrix(x, 300), std::exception);
}

TEST(Forest, InformativeColumnDominates) {
  auto p = planted(3, 200, 10);
  auto imp = forest_importance(bin_matrix(p.x, 64), p.y, ForestConfig{}, 5);
  ASSERT_EQ(imp.size(), 10);
  EXPECT_NEAR(imp.sum(), 1.0, 1e-9);
  for (int c = 3; c < 10; ++c) {
    EXPECT_GT(imp(0), imp(c));
    EXPECT_GT(imp(1), imp(c));
    EXPECT_GT(imp(2), imp(c));
  }
}

TEST(Forest, SeedDeterminesResult) {
  auto p = planted(4, 120, 6);
  auto bm = bin_matrix(p.x, 32);
  auto a = forest_importance(bm, p.y, ForestConfig{}, 9);
  auto b = forest_importance(bm, p.y, ForestConfig{}, 9);
  EXPECT_EQ(a, b);
}

TEST(Boruta, FindsPlantedFeatures) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    auto p = planted(seed);
    auto res = boruta_select(p.x, p.y, BorutaConfig{}, seed);
    ASSERT_EQ(res.decisions.size(), 45u);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(res.decisions[c], BorutaDecision::confirmed) << seed;
    int rejected = 0;
    for (int c = 3; c < 45; ++c) rejected += res.decisions[c] == BorutaDecision::rejected;
    EXPECT_GE(rejected, 40) << seed;
    EXPECT_LE(res.iterations, BorutaConfig{}.max_iter);
  }
}

TEST(Boruta, ConfirmedListMatchesDecisions) {
  auto p = planted(8, 150, 20);
  auto res = boruta_select(p.x, p.y, BorutaConfig{}, 8);
  std::vector<std::size_t> expect;
  for (std::size_t c = 0; c < res.decisions.size(); ++c)
    if (res.decisions[c] == BorutaDecision::confirmed) expect.push_back(c);
  EXPECT_EQ(res.confirmed, expect);
}

TEST(Boruta, RejectsTooFewIterations) {
  auto p = planted(1, 50, 5);
  BorutaConfig cfg;
  cfg.max_iter = 10;
  EXPECT_THROW(boruta_select(p.x, p.y, cfg, 0), std::exception);
}
