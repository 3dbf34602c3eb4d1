#include <benchmark/benchmark.h>

#include <random>

#include "ecogvoice/explain.hpp"
#include "ecogvoice/learn/binning.hpp"
#include "ecogvoice/learn/boruta.hpp"
#include "ecogvoice/learn/forest.hpp"
#include "ecogvoice/learn/models.hpp"
#include "ecogvoice/learn/tpe.hpp"
#include "ecogvoice/rng.hpp"

using namespace ecogvoice;
using namespace ecogvoice::learn;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Data data(int rows, int cols) {
  Rng rng(1);
  std::normal_distribution<double> z;
  Data d{Eigen::MatrixXd(rows, cols), std::vector<int>(rows)};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) d.x(r, c) = z(rng);
    d.y[r] = d.x(r, 0) + d.x(r, 1) + 0.5 * z(rng) > 0;
  }
  return d;
}

std::vector<std::size_t> all_columns(int cols) {
  std::vector<std::size_t> v(cols);
  for (int c = 0; c < cols; ++c) v[c] = c;
  return v;
}

}  // namespace

static void BM_Forest(benchmark::State& state) {
  auto d = data(240, 90);
  auto bm = bin_matrix(d.x, 64);
  ForestConfig cfg;
  cfg.n_trees = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(forest_importance(bm, d.y, cfg, 3));
}
BENCHMARK(BM_Forest)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_Boruta(benchmark::State& state) {
  auto d = data(200, 45);
  BorutaConfig cfg;
  cfg.max_iter = 30;
  for (auto _ : state) benchmark::DoNotOptimize(boruta_select(d.x, d.y, cfg, 5));
}
BENCHMARK(BM_Boruta)->Unit(benchmark::kMillisecond);

static void BM_FitModel(benchmark::State& state) {
  auto alg = static_cast<Algorithm>(state.range(0));
  auto d = data(240, 20);
  auto config = sample_startup(model_space(alg), 0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(alg, d.x, d.y, config, all_columns(20), 9));
  state.SetLabel(std::string(to_string(alg)));
}
BENCHMARK(BM_FitModel)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

static void BM_TpeSuggest(benchmark::State& state) {
  auto space = joint_space(Algorithm::gbt_b);
  std::vector<Trial> history;
  Rng rng(2);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < state.range(0); ++i) history.push_back({sample_random(space, rng), u(rng)});
  for (auto _ : state) benchmark::DoNotOptimize(tpe_suggest(history, space, 11));
}
BENCHMARK(BM_TpeSuggest)->Arg(10)->Arg(49)->Unit(benchmark::kMicrosecond);

static void BM_Shapley(benchmark::State& state) {
  auto d = data(240, 20);
  auto cols = all_columns(10);
  auto model = fit_model(Algorithm::svm, d.x, d.y, sample_startup(model_space(Algorithm::svm), 0, 7), cols, 9);
  explain::ModelFn f = [&](const Eigen::MatrixXd& m) { return model.score(m); };
  Eigen::MatrixXd x = d.x.topRows(26);
  Eigen::MatrixXd bg = d.x.bottomRows(100);
  for (auto _ : state) benchmark::DoNotOptimize(explain::shapley_values(f, x, bg, cols, explain::ShapleyConfig{}, 4));
}
BENCHMARK(BM_Shapley)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
