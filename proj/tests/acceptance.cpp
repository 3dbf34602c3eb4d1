// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ecogvoice/dsp.hpp"
#include "ecogvoice/explain.hpp"
#include "ecogvoice/learn/boruta.hpp"
#include "ecogvoice/learn/metrics.hpp"
#include "ecogvoice/learn/nested_cv.hpp"
#include "ecogvoice/learn/report.hpp"
#include "ecogvoice/learn/tpe.hpp"
#include "ecogvoice/rng.hpp"
#include "ecogvoice/stats.hpp"
#include "ecogvoice/synthlab.hpp"
#include "ecogvoice/voicequality.hpp"
#include "oracles.hpp"
#include "signals.hpp"
#include "toy.hpp"

namespace fs = std::filesystem;
using namespace ecogvoice;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1
Outcome metric_arithmetic() {
  Outcome o;
  auto t0 = Clock::now();
  learn::Confusion c{28, 4, 14, 8};
  auto m = learn::compute_metrics(c);
  o.require(learn::round1(m.accuracy) == 77.8, "ACC " + fmt("%.4f", m.accuracy));
  o.require(learn::round1(m.sensitivity) == 87.5, "SEN " + fmt("%.4f", m.sensitivity));
  o.require(learn::round1(m.specificity) == 63.6, "SPE " + fmt("%.4f", m.specificity));
  o.require(learn::round1(m.f1) == 82.4, "F1 " + fmt("%.4f", m.f1));
  double t = seconds_since(t0);
  o.require(t < 1.0, "runtime " + fmt("%.3f s", t));
  o.note("77.8/87.5/63.6/82.4 reproduced");
  return o;
}

// 2
Outcome dsp_oracles() {
  Outcome o;
  auto t0 = Clock::now();
  auto measure = [](const synth::VoiceSpec& spec) {
    auto v = synth::synth_voice(spec);
    auto track = dsp::pitch_track(v.clip);
    auto seqs = vq::track_periods(v.clip, track);
    struct {
      std::optional<double> jitter, shimmer, hnr;
    } m{vq::jitter(seqs), vq::shimmer(seqs), vq::hnr(v.clip, track)};
    return m;
  };
  double worst_j = 0, worst_s = 0, worst_h = 0, worst_f0 = 0, worst_fm = 0;
  for (double eps : {0.005, 0.01, 0.02, 0.04}) {
    auto mj = measure(testsig::voice(120.0, eps, 0.0, 60.0, 7));
    auto ms = measure(testsig::voice(120.0, 0.0, eps, 60.0, 7));
    if (!mj.jitter || !ms.shimmer) {
      o.require(false, "jitter/shimmer undefined at eps " + fmt("%g", eps));
      continue;
    }
    worst_j = std::max(worst_j, std::abs(*mj.jitter / (2 * eps) - 1.0));
    worst_s = std::max(worst_s, std::abs(*ms.shimmer / (2 * eps) - 1.0));
  }
  for (double snr : {0.0, 10.0, 20.0}) {
    auto m = measure(testsig::voice(120.0, 0.0, 0.0, snr, 3));
    if (!m.hnr) {
      o.require(false, "HNR undefined at " + fmt("%g dB", snr));
      continue;
    }
    worst_h = std::max(worst_h, std::abs(*m.hnr - snr));
  }
  for (double f0 : {100.0, 150.0, 250.0, 400.0}) {
    auto v = synth::synth_voice(testsig::voice(f0));
    auto track = dsp::pitch_track(v.clip);
    double sum = 0;
    int n = 0;
    for (const auto& f : track.f0)
      if (f) {
        sum += *f;
        ++n;
      }
    worst_f0 = n ? std::max(worst_f0, std::abs(sum / n - f0) / f0) : 1.0;
  }
  for (auto [f1, f2] : {std::pair{500.0, 1500.0}, std::pair{700.0, 1700.0}, std::pair{700.0, 1100.0}}) {
    auto spec = testsig::voice(120.0);
    spec.formant_poles = {{f1, 80.0}, {f2, 110.0}};
    auto v = synth::synth_voice(spec);
    auto est = dsp::formants(v.clip, dsp::pitch_track(v.clip));
    if (!est) {
      worst_fm = 1.0;
      continue;
    }
    worst_fm = std::max({worst_fm, std::abs(est->f1_mean - f1) / f1, std::abs(est->f2_mean - f2) / f2});
  }
  o.require(worst_j <= 0.10, "jitter rel err " + fmt("%.3f", worst_j));
  o.require(worst_s <= 0.10, "shimmer rel err " + fmt("%.3f", worst_s));
  o.require(worst_h <= 1.5, "HNR err " + fmt("%.2f dB", worst_h));
  o.require(worst_f0 <= 0.01, "F0 rel err " + fmt("%.4f", worst_f0));
  o.require(worst_fm <= 0.05, "formant rel err " + fmt("%.3f", worst_fm));
  double t = seconds_since(t0);
  o.require(t < 30.0, "runtime " + fmt("%.1f s", t));
  o.note("max errors jitter " + fmt("%.3f", worst_j) + ", shimmer " + fmt("%.3f", worst_s) + ", HNR " +
         fmt("%.2f dB", worst_h) + ", F0 " + fmt("%.4f", worst_f0) + ", formants " + fmt("%.3f", worst_fm) + ", " +
         fmt("%.1f s", t));
  return o;
}

// 3
Outcome savitzky_golay() {
  Outcome o;
  auto series = [](const std::function<double(int, int)>& f) {
    dsp::FrameSeries s;
    s.values.resize(60, 12);
    for (int t = 0; t < 60; ++t)
      for (int c = 0; c < 12; ++c) s.values(t, c) = f(t, c);
    s.frame_len = 1102;
    s.hop = 441;
    s.sample_rate = 44100;
    return s;
  };
  auto lin = series([](int t, int c) { return (0.7 + c) * t - 3.0 * c + 1.25; });
  auto quad = series([](int t, int c) { return (0.3 + 0.1 * c) * t * t - 2.0 * t + c; });
  auto d = dsp::sg_derivative(lin, 1);
  auto dd = dsp::sg_derivative(quad, 2);
  double err_d = 0, err_dd = 0;
  for (int t = 4; t < 56; ++t)
    for (int c = 0; c < 12; ++c) {
      err_d = std::max(err_d, std::abs(d.values(t, c) - (0.7 + c)));
      err_dd = std::max(err_dd, std::abs(dd.values(t, c) - 2.0 * (0.3 + 0.1 * c)));
    }
  o.require(err_d <= 1e-9, "delta err " + fmt("%.2e", err_d));
  o.require(err_dd <= 1e-9, "delta-delta err " + fmt("%.2e", err_dd));
  o.note("max interior error delta " + fmt("%.1e", err_d) + ", delta-delta " + fmt("%.1e", err_dd));
  return o;
}

// 4
Outcome leakage_audit() {
  Outcome o;
  auto ds = toy::dataset(20, 5, 45, 13);
  auto plan = learn::make_fold_plan(ds, 13);
  for (auto alg : learn::all_algorithms()) {
    learn::SelectionCache cache;
    learn::LeakageAudit audit(ds, plan);
    learn::NestedCvConfig cfg;
    cfg.budget = 4;
    cfg.seed = 13;
    cfg.tpe.n_startup = 2;
    cfg.boruta.max_iter = 20;
    cfg.auditor = &audit;
    learn::nested_cv(ds, alg, plan, cfg, &cache);
    std::map<std::string, std::size_t> folds_seen;
    for (const auto& e : audit.to_json()) folds_seen[e["phase"].get<std::string>()]++;
    bool all_phases = true;
    for (const char* ph : {"imputation", "standardization", "selection", "tuning", "fitting", "evaluation"})
      all_phases = all_phases && folds_seen[ph] == plan.n_outer();
    o.require(all_phases, std::string(learn::to_string(alg)) + ": phases not recorded for every fold");
    o.require(audit.violations() == 0,
              std::string(learn::to_string(alg)) + ": " + std::to_string(audit.violations()) + " test reads");
  }
  o.note("0 test-participant reads outside evaluation, 10 folds x 5 algorithms");
  return o;
}

// 5
Outcome boruta_planted() {
  Outcome o;
  auto t0 = Clock::now();
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(200, 45);
    std::vector<int> y(200);
    for (int r = 0; r < 200; ++r) {
      for (int c = 0; c < 45; ++c) x(r, c) = z(rng);
      y[r] = x(r, 0) + x(r, 1) + x(r, 2) + 0.3 * z(rng) > 0;
    }
    auto res = learn::boruta_select(x, y, learn::BorutaConfig{}, seed);
    int informative = 0, rejected = 0;
    for (int c = 0; c < 45; ++c) {
      if (c < 3 && res.decisions[c] == learn::BorutaDecision::confirmed) ++informative;
      if (c >= 3 && res.decisions[c] == learn::BorutaDecision::rejected) ++rejected;
    }
    passed += informative == 3 && rejected >= 40;
  }
  double t = seconds_since(t0);
  o.require(passed >= 9, std::to_string(passed) + "/10 seeds");
  o.require(t < 120.0, "runtime " + fmt("%.1f s", t));
  o.note(std::to_string(passed) + "/10 seeds, " + fmt("%.1f s", t));
  return o;
}

// 6
Outcome tpe_sanity() {
  Outcome o;
  learn::HyperSpace space;
  space.params.push_back({"x", learn::ParamKind::uniform, 0.0, 10.0, {}});
  auto loss = [](const learn::HyperConfig& c) {
    double x = learn::get_number(c, "x");
    return (x - 3.0) * (x - 3.0);
  };
  int close = 0, wins = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto trials = learn::tpe_minimize(space, [&](const learn::HyperConfig& c, int) { return loss(c); }, 60, seed);
    const auto& best = trials[learn::best_trial(trials)];
    double dx = std::abs(learn::get_number(best.config, "x") - 3.0);
    worst = std::max(worst, dx);
    close += dx <= 0.3;
    Rng rng(derive_seed(seed, {0x7261ULL}));
    double random_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 60; ++i) random_best = std::min(random_best, loss(learn::sample_random(space, rng)));
    wins += best.loss <= random_best;
  }
  o.require(close == 10, std::to_string(close) + "/10 seeds within 0.3");
  o.require(wins >= 8, "TPE <= random in " + std::to_string(wins) + "/10");
  o.note("worst |x - 3| " + fmt("%.4f", worst) + ", TPE <= random in " + std::to_string(wins) + "/10 seeds");
  return o;
}

// 7
Outcome shapley_exactness() {
  Outcome o;
  auto gaussian = [](int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = z(rng);
    return m;
  };
  explain::ModelFn f = [](const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double s = 1.2 * x(r, 0) - 0.8 * x(r, 1) + std::tanh(x(r, 2) * x(r, 3)) + 0.5 * x(r, 4) * x(r, 4) -
                 0.6 * x(r, 5) * x(r, 6) + 0.4 * std::sin(2.0 * x(r, 7)) + 0.3 * x(r, 8) * x(r, 0);
      out(r) = 1.0 / (1.0 + std::exp(-s));
    }
    return out;
  };
  auto x = gaussian(40, 10, 21);
  auto bg = gaussian(100, 10, 22);
  std::vector<std::size_t> subset{0, 1, 2, 3, 4, 5, 6, 7, 8};
  auto res = explain::shapley_values(f, x, bg, subset, explain::ShapleyConfig{200}, 23);
  Eigen::VectorXd est = Eigen::VectorXd::Zero(10), exact = Eigen::VectorXd::Zero(10);
  for (int r = 0; r < 40; ++r) {
    est += res.values.row(r).cwiseAbs().transpose();
    exact += oracle::brute_shapley(f, x.row(r), bg, subset).cwiseAbs();
  }
  double worst = 0;
  for (std::size_t c : subset) worst = std::max(worst, std::abs(est(c) - exact(c)) / exact(c));
  o.require(worst <= 0.05, "mean |value| rel err " + fmt("%.4f", worst));
  o.require(est(9) == 0.0, "feature outside subset attributed");

  int local_ok = 0, total = 0;
  for (auto rows : {100, 37}) {
    auto r2 = explain::shapley_values(f, x, bg.topRows(rows), subset, explain::ShapleyConfig{200}, 24);
    for (int r = 0; r < 40; ++r) {
      double gap = r2.values.row(r).sum() + r2.base_value - r2.output(r);
      local_ok += std::abs(gap) <= 1e-9 + 3.0 * r2.local_error_se(r);
      ++total;
    }
  }
  o.require(local_ok == total, "local accuracy " + std::to_string(local_ok) + "/" + std::to_string(total));
  o.note("max rel err on mean |value| " + fmt("%.4f", worst) + " (9 features), local accuracy " +
         std::to_string(local_ok) + "/" + std::to_string(total) + " within 3 SE");
  return o;
}

// 8
Outcome stats_oracles() {
  Outcome o;
  Rng rng(31);
  std::uniform_real_distribution<double> u;
  double bh_err = 0;
  bool bh_props = true;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> p(1 + rep % 42);
    for (auto& v : p) v = rep % 4 == 0 ? std::round(u(rng) * 20) / 20 : std::pow(u(rng), 3);
    auto adj = stats::bh_adjust(p);
    auto ref = oracle::bh(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      bh_err = std::max(bh_err, std::abs(adj[i] - ref[i]));
      bh_props = bh_props && adj[i] >= p[i] && adj[i] <= 1.0;
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] <= p[i]) bh_props = bh_props && adj[j] <= adj[i];
    }
  }
  o.require(bh_err <= 1e-14, "BH err " + fmt("%.2e", bh_err));
  o.require(bh_props, "BH monotone/>= raw violated");

  std::vector<double> y{3.1, 2.4, 4.0, 5.2, 3.3, 4.8, 2.2, 3.9, 5.5, 4.1, 2.8, 4.4};
  std::vector<int> g{0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1};
  Eigen::MatrixXd cov(12, 3);
  cov << 61, 12, 1, 72, 16, 0, 68, 10, 1, 75, 14, 0, 59, 18, 1, 70, 12, 0, 66, 11, 0, 73, 16, 1, 80, 9, 1, 64, 14,
      0, 69, 13, 1, 77, 15, 0;
  auto eta = stats::ancova_eta(y, g, cov, {"age", "education", "sex"});
  Eigen::MatrixXd full(12, 5);
  for (int i = 0; i < 12; ++i) full.row(i) << 1.0, cov(i, 0), cov(i, 1), cov(i, 2), g[i];
  double eta_err = std::abs(eta.eta_sq - oracle::eta_sq(full, Eigen::Map<Eigen::VectorXd>(y.data(), 12)));
  o.require(eta_err <= 1e-10, "ANCOVA err " + fmt("%.2e", eta_err));

  double sp_err = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng r(s);
    std::normal_distribution<double> z;
    std::vector<double> a(60), b(60);
    for (int i = 0; i < 60; ++i) {
      a[i] = std::round(z(r) * 3);
      b[i] = 0.4 * a[i] + z(r);
    }
    auto part = stats::partial_spearman(a, b, Eigen::MatrixXd(60, 0));
    auto plain = stats::spearman(a, b);
    sp_err = std::max({sp_err, std::abs(*part.rho - *plain.rho), std::abs(*plain.rho - oracle::spearman(a, b))});
  }
  o.require(sp_err <= 1e-12, "partial vs plain Spearman err " + fmt("%.2e", sp_err));

  // Global null: any discovery in a family makes its FDP 1.
  const int reps = 1000;
  double fdp_sum = 0, fdp_sq = 0;
  int families = 0;
  for (int rep = 0; rep < reps; ++rep) {
    auto rows = toy::null_rows(54, 5, derive_seed(97, {static_cast<std::uint64_t>(rep)}));
    auto report = stats::run_stats(rows);
    for (const auto& cond : report.conditions) {
      bool rho_hit = false, eta_hit = false;
      for (const auto& fr : report.rows) {
        if (fr.condition != cond) continue;
        rho_hit = rho_hit || (fr.rho_p_adj && *fr.rho_p_adj < 0.05);
        eta_hit = eta_hit || (fr.eta_p_adj && *fr.eta_p_adj < 0.05);
      }
      for (bool hit : {rho_hit, eta_hit}) {
        fdp_sum += hit;
        fdp_sq += hit;
        ++families;
      }
    }
  }
  double fdp = fdp_sum / families;
  double se = std::sqrt((fdp_sq / families - fdp * fdp) / families);
  o.require(fdp <= 0.05 + 2.0 * se, "mean FDP " + fmt("%.4f", fdp));
  o.note("BH err " + fmt("%.1e", bh_err) + ", ANCOVA err " + fmt("%.1e", eta_err) + ", Spearman err " +
         fmt("%.1e", sp_err) + ", null FDP " + fmt("%.4f", fdp) + " (SE " + fmt("%.4f", se) + ", " +
         std::to_string(families) + " families)");
  return o;
}

// CLI plumbing for 9 and 10.

int jobs_available() { return std::max(1u, std::thread::hardware_concurrency()); }

bool cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(ECOGVOICE_CLI) + " " + args + " >> " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

std::map<std::string, double> ranking_of(const fs::path& csv, std::vector<std::string>* order) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> freq;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) continue;
    order->push_back(cells[1]);
    freq[cells[1]] = std::stod(cells[3]);
  }
  return freq;
}

// 9
Outcome end_to_end(const fs::path& work) {
  Outcome o;
  const std::string jobs = " --jobs " + std::to_string(jobs_available());
  const fs::path log = work / "e2e.log";
  const fs::path eff = work / "effect";
  auto t0 = Clock::now();
  bool ok = cli("--seed 7" + jobs + " synth --spec " + std::string(ECOGVOICE_CONFIGS) + "/effect_corpus.json --out " +
                    (eff / "corpus").string(),
                log) &&
            cli("--seed 7" + jobs + " extract --manifest " + (eff / "corpus/manifest.csv").string() + " --out " +
                    (eff / "feat").string(),
                log);
  const std::string feat = (eff / "feat/features.csv").string();
  for (const char* cond : {"cognitive", "daily"})
    ok = ok && cli("--seed 7" + jobs + " evaluate --features " + feat + " --condition " + cond + " --out " +
                       (eff / (std::string("eval_") + cond)).string(),
                   log);
  ok = ok && cli("--seed 7" + jobs + " explain --features " + feat + " --report " +
                     (eff / "eval_cognitive/eval_report.json").string() + " --report " +
                     (eff / "eval_daily/eval_report.json").string() + " --out " + (eff / "explain").string(),
                 log);
  const double effect_time = seconds_since(t0);
  if (!ok) {
    o.require(false, "effect pipeline failed, see " + log.string());
    return o;
  }
  for (const char* cond : {"cognitive", "daily"}) {
    auto rep = learn::EvalReport::from_json(learn::read_json(eff / (std::string("eval_") + cond) / "eval_report.json"));
    o.require(rep.n_participants == 54, std::string(cond) + ": participants " + std::to_string(rep.n_participants));
    const auto* best = rep.best();
    o.require(best->metrics.accuracy >= 70.0, std::string(cond) + " best accuracy " + fmt("%.1f", best->metrics.accuracy));
    std::vector<std::string> order;
    auto freq = ranking_of(eff / "explain" / (std::string("ranking_") + cond + ".csv"), &order);
    std::string top;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i) top += (i ? " " : "") + order[i];
    for (const char* feature : {"jitter", "hnr"}) {
      auto it = std::find(order.begin(), order.end(), feature);
      auto rank = static_cast<std::size_t>(it - order.begin());
      o.require(freq[feature] > 0.5, std::string(cond) + " " + feature + " frequency " + fmt("%.2f", freq[feature]));
      o.require(rank < 5, std::string(cond) + " " + feature + " Shapley rank " + std::to_string(rank + 1));
    }
    o.note(std::string(cond) + " " + std::to_string(rep.n_rows) + " rows, best " +
           std::string(learn::to_string(best->algorithm)) + " " + fmt("%.1f%%", best->metrics.accuracy) +
           ", top-5 [" + top + "]");
  }
  o.require(effect_time < 1200.0, "effect pipeline " + fmt("%.0f s", effect_time));
  o.note("effect pipeline " + fmt("%.0f s", effect_time));

  // Null corpus: every algorithm within a 95% band around chance, with the
  // participant count as the effective sample size.
  const fs::path nul = work / "null";
  auto t1 = Clock::now();
  ok = cli("--seed 11" + jobs + " synth --spec " + std::string(ECOGVOICE_CONFIGS) + "/null_corpus.json --out " +
               (nul / "corpus").string(),
           log) &&
       cli("--seed 11" + jobs + " extract --manifest " + (nul / "corpus/manifest.csv").string() + " --out " +
               (nul / "feat").string(),
           log) &&
       cli("--seed 11" + jobs + " evaluate --features " + (nul / "feat/features.csv").string() +
               " --condition cognitive --out " + (nul / "eval_cognitive").string(),
           log);
  if (!ok) {
    o.require(false, "null pipeline failed, see " + log.string());
    return o;
  }
  auto rep = learn::EvalReport::from_json(learn::read_json(nul / "eval_cognitive/eval_report.json"));
  const double maj = rep.majority_rate();
  const double margin = 196.0 * std::sqrt(0.25 / static_cast<double>(rep.n_participants));
  const double lo = 50.0 - margin, hi = maj + margin;
  for (const auto& a : rep.algorithms)
    o.require(a.metrics.accuracy >= lo && a.metrics.accuracy <= hi,
              "null " + std::string(learn::to_string(a.algorithm)) + " " + fmt("%.1f", a.metrics.accuracy));
  o.note("null best " + fmt("%.1f%%", rep.best()->metrics.accuracy) + " in band [" + fmt("%.1f", lo) + ", " +
         fmt("%.1f", hi) + "] (" + fmt("%.0f s", seconds_since(t1)) + ")");
  return o;
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* diff, std::size_t* files) {
  std::vector<fs::path> fa, fb;
  for (auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) {
    *diff = "file lists differ under " + a.filename().string();
    return false;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& rel : fa) {
    if (rel.filename() == "run.log") continue;
    ++*files;
    if (slurp(a / rel) != slurp(b / rel)) {
      *diff = rel.string();
      return false;
    }
  }
  return true;
}

// 10
Outcome determinism(const fs::path& work) {
  Outcome o;
  const fs::path spec = work / "det_spec.json";
  const fs::path cfg = work / "det_config.json";
  std::ofstream(spec) << R"({"n_participants": 14, "n_high": 8, "duration": 0.8, "missingness": "random",
                             "missing_rate": 0.1, "group_effect": {"jitter": 0.004, "snr_db": -4.0}, "seed": 5})";
  std::ofstream(cfg) << R"({"evaluate": {"budget": 4, "tpe": {"n_startup": 2}, "boruta": {"max_iter": 20}},
                            "explain": {"n_permutations": 60, "background_rows": 30}})";
  // Every run uses the same paths, since run_config.json records input paths.
  const fs::path dir = work / "det_run";
  auto pipeline = [&](const fs::path& keep, int jobs) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "run.log";
    const std::string g = "--seed 3 --jobs " + std::to_string(jobs) + " --config " + cfg.string() + " ";
    const std::string feat = (dir / "feat/features.csv").string();
    bool ok = cli(g + "synth --spec " + spec.string() + " --out " + (dir / "corpus").string(), log) &&
              cli(g + "extract --manifest " + (dir / "corpus/manifest.csv").string() + " --out " +
                      (dir / "feat").string(),
                  log) &&
              cli(g + "evaluate --features " + feat + " --condition cognitive --out " + (dir / "ev_c").string(), log) &&
              cli(g + "evaluate --features " + feat + " --condition daily --algorithms knn,gbt-b --out " +
                      (dir / "ev_d").string(),
                  log) &&
              cli(g + "stats --features " + feat + " --out " + (dir / "stats").string(), log) &&
              cli(g + "explain --features " + feat + " --report " + (dir / "ev_c/eval_report.json").string() +
                      " --report " + (dir / "ev_d/eval_report.json").string() + " --out " + (dir / "explain").string(),
                  log) &&
              cli(g + "report --eval " + (dir / "ev_c/eval_report.json").string() + " --eval " +
                      (dir / "ev_d/eval_report.json").string() + " --out " + (dir / "report").string(),
                  log);
    fs::rename(dir, keep);
    return ok;
  };
  bool ok = pipeline(work / "det_a", 1) && pipeline(work / "det_b", 1) && pipeline(work / "det_c", 2) &&
            pipeline(work / "det_d", 3);
  if (!ok) {
    o.require(false, "pipeline failed, see run.log under " + work.string());
    return o;
  }
  std::size_t files = 0;
  for (const char* other : {"det_b", "det_c", "det_d"}) {
    std::string diff;
    o.require(same_tree(work / "det_a", work / other, &diff, &files), std::string(other) + " differs: " + diff);
  }
  o.note("synth/extract/evaluate/stats/explain/report byte-identical across rerun and --jobs 1/2/3 (" +
         std::to_string(files) + " file comparisons)");
  return o;
}

}  // namespace

int main() {
  const fs::path work = fs::absolute("acceptance_work");
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {1, "metric arithmetic", metric_arithmetic},
      {2, "DSP oracles", dsp_oracles},
      {3, "Savitzky-Golay exactness", savitzky_golay},
      {4, "leakage audit", leakage_audit},
      {5, "Boruta planted features", boruta_planted},
      {6, "TPE sanity", tpe_sanity},
      {7, "Shapley exactness", shapley_exactness},
      {8, "statistics oracles", stats_oracles},
      {9, "end-to-end synthetic corpus", [&] { return end_to_end(work); }},
      {10, "determinism", [&] { return determinism(work); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
