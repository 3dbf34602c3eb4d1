#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"
#include "ecogvoice/explain.hpp"
#include "ecogvoice/features.hpp"
#include "ecogvoice/learn/report.hpp"
#include "ecogvoice/stats.hpp"
#include "ecogvoice/svg.hpp"
#include "ecogvoice/synthlab.hpp"

namespace ecogvoice::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fnv1a(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

json input(const fs::path& p) { return {{"path", p.string()}, {"fnv1a64", fnv1a(p)}}; }

// Everything needed to replay the run. Worker count and output location do
// not change any artifact and are left out so echoes compare equal.
void write_echo(const fs::path& out, const std::string& command, const json& args, const Global& g,
                const config::RunConfig& effective) {
  json j;
  j["command"] = command;
  j["seed"] = g.seed;
  j["arguments"] = args;
  j["config"] = config::to_json(effective);
  learn::write_json(out / "run_config.json", j);
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create " + p.string() + ": " + ec.message());
}

std::string fixed1(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", learn::round1(v));
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_table(const learn::EvalReport& rep) {
  std::cout << "condition " << rep.condition << ": " << rep.n_rows << " rows, " << rep.n_participants
            << " participants, majority rate " << fixed1(rep.majority_rate()) << "%\n";
  std::cout << "algorithm  ACC    SEN    SPE    F1\n";
  for (const auto& a : rep.algorithms) {
    std::string name(learn::to_string(a.algorithm));
    name.resize(10, ' ');
    std::cout << name << ' ' << fixed1(a.metrics.accuracy) << "   " << fixed1(a.metrics.sensitivity) << "   "
              << fixed1(a.metrics.specificity) << "   " << fixed1(a.metrics.f1) << '\n';
  }
}

}  // namespace

int cmd_extract(const Global& g, const ExtractArgs& a) {
  auto cfg = g.config;
  if (a.vad_drop_db) cfg.extract.vad.drop_db = *a.vad_drop_db;
  if (a.vad_min_segment_ms) cfg.extract.vad.min_segment_ms = *a.vad_min_segment_ms;
  if (a.vad_pad_ms) cfg.extract.vad.pad_ms = *a.vad_pad_ms;

  const auto records = corpus::load_manifest(a.manifest);
  if (records.empty()) throw DataError("manifest " + a.manifest.string() + " has no records");
  const auto res = features::extract_all(records, cfg.extract, g.jobs);

  make_dir(a.out);
  {
    std::ofstream skip(a.out / "skipped.csv");
    if (!skip) throw DataError("cannot write " + (a.out / "skipped.csv").string());
    skip << "participant_id,question_id,reason\n";
    for (const auto& s : res.skipped) skip << csv::join({s.participant_id, s.question_id, s.reason}) << '\n';
  }
  for (const auto& s : res.skipped)
    std::cerr << "skipped " << s.participant_id << ' ' << s.question_id << ": " << s.reason << '\n';
  if (res.rows.empty()) throw DataError("all " + std::to_string(records.size()) + " records failed extraction");

  features::write_feature_table(a.out / "features.csv", res.rows);
  write_echo(a.out, "extract", {{"manifest", input(a.manifest)}}, g, cfg);
  std::size_t cog = 0;
  for (const auto& r : res.rows) cog += r.condition == corpus::Condition::cognitive;
  std::cout << "extracted " << res.rows.size() << " rows (" << cog << " cognitive, " << res.rows.size() - cog
            << " daily), skipped " << res.skipped.size() << '\n';
  return 0;
}

int cmd_evaluate(const Global& g, const EvaluateArgs& a) {
  auto cfg = g.config;
  if (a.budget) cfg.budget = *a.budget;
  std::vector<learn::Algorithm> algs;
  if (a.algorithms.empty()) {
    const auto all = learn::all_algorithms();
    algs.assign(all.begin(), all.end());
  } else {
    for (const auto& s : a.algorithms) {
      const auto alg = learn::parse_algorithm(s);
      if (std::find(algs.begin(), algs.end(), alg) == algs.end()) algs.push_back(alg);
    }
  }

  const auto rows = features::read_feature_table(a.features);
  const auto ds = features::build_dataset(rows, features::parse_mode(a.condition));
  const auto n_participants = ds.participants().size();
  if (n_participants < 10)
    throw DataError("evaluation needs at least 10 participants, found " + std::to_string(n_participants));

  const auto plan = learn::make_fold_plan(ds, g.seed);
  auto cv = config::cv_config(cfg, g.seed, g.jobs);
  learn::LeakageAudit audit(ds, plan);
  cv.auditor = &audit;
  learn::SelectionCache cache;
  std::vector<learn::AlgorithmReport> reports;
  for (auto alg : algs) {
    std::cerr << "evaluating " << learn::to_string(alg) << '\n';
    reports.push_back(learn::nested_cv(ds, alg, plan, cv, &cache));
  }
  if (audit.violations() != 0)
    throw std::runtime_error("leakage audit: " + std::to_string(audit.violations()) +
                             " test-participant rows were read before evaluation");
  const auto rep = learn::make_report(ds, plan, g.seed, cfg.budget, std::move(reports));

  make_dir(a.out);
  learn::write_json(a.out / "fold_plan.json", plan.to_json());
  learn::write_json(a.out / "leakage_audit.json", {{"violations", audit.violations()}, {"reads", audit.to_json()}});
  rep.write_summary_csv(a.out / "summary.csv");
  learn::write_json(a.out / "eval_report.json", rep.to_json());
  std::vector<std::string> alg_names;
  for (auto alg : algs) alg_names.emplace_back(learn::to_string(alg));
  write_echo(a.out, "evaluate",
             {{"features", input(a.features)}, {"condition", a.condition}, {"algorithms", alg_names}}, g, cfg);
  print_table(rep);
  return 0;
}

int cmd_stats(const Global& g, const StatsArgs& a) {
  auto cfg = g.config;
  if (a.unit) cfg.stats_unit = stats::parse_unit(*a.unit);
  const auto rows = features::read_feature_table(a.features);
  stats::StatsConfig sc;
  sc.unit = cfg.stats_unit;
  const auto rep = stats::run_stats(rows, sc);
  if (rep.conditions.empty()) throw DataError("feature table has no rows");

  make_dir(a.out);
  rep.write_csv(a.out / "stats.csv");
  learn::write_json(a.out / "stats.json", rep.to_json());

  // Association strength per condition and cross-condition agreement.
  std::vector<std::string> panels;
  for (const auto& stat : {std::string("abs_rho"), std::string("eta_sq")}) {
    std::vector<svg::BoxSeries> boxes;
    for (const auto& c : rep.conditions) {
      svg::BoxSeries b;
      b.label = c;
      for (const auto& r : rep.rows)
        if (r.condition == c) {
          const auto& v = stat == "abs_rho" ? r.rho : r.eta_sq;
          if (v) b.values.push_back(stat == "abs_rho" ? std::abs(*v) : *v);
        }
      boxes.push_back(std::move(b));
    }
    for (const auto& cmp : rep.comparisons)
      if (cmp.statistic == stat && cmp.paired && boxes.size() == 2)
        boxes[1].annotation = std::string(stats::stars(cmp.paired->p));
    panels.push_back(svg::box_plot(stat == "abs_rho" ? "|partial Spearman rho| with ECog" : "partial eta squared, high vs low",
                                   boxes, stat == "abs_rho" ? "|rho|" : "eta_p^2"));
  }
  if (rep.conditions.size() == 2) {
    for (const auto& cmp : rep.comparisons) {
      std::vector<svg::Point> pts;
      for (const auto& f : rep.features) {
        const auto* ra = rep.find(f, cmp.condition_a);
        const auto* rb = rep.find(f, cmp.condition_b);
        const auto& va = cmp.statistic == "abs_rho" ? ra->rho : ra->eta_sq;
        const auto& vb = cmp.statistic == "abs_rho" ? rb->rho : rb->eta_sq;
        if (va && vb) pts.push_back({*va, *vb});
      }
      std::string note;
      if (cmp.agreement.rho)
        note = "Spearman rho = " + fixed(*cmp.agreement.rho, 2) + ", p = " + fixed(cmp.agreement.p.value_or(1.0), 4);
      const std::string what = cmp.statistic == "abs_rho" ? "rho" : "eta_p^2";
      panels.push_back(svg::scatter(what + " agreement across conditions", pts, what + " (" + cmp.condition_a + ")",
                                    what + " (" + cmp.condition_b + ")", note));
    }
  }
  svg::write(a.out / "fig3.svg", svg::stack(panels));

  // Features significant for both statistics in a condition, by group.
  std::vector<std::string> fig4;
  for (const auto& cond : rep.conditions) {
    std::vector<const stats::FeatureStats*> sig;
    for (const auto& r : rep.rows)
      if (r.condition == cond && r.rho_p_adj && *r.rho_p_adj < 0.05 && r.eta_p_adj && *r.eta_p_adj < 0.05)
        sig.push_back(&r);
    std::stable_sort(sig.begin(), sig.end(), [](auto* x, auto* y) { return *x->eta_p_adj < *y->eta_p_adj; });
    if (sig.size() > 8) sig.resize(8);
    std::vector<svg::BoxSeries> boxes;
    for (const auto* s : sig) {
      const auto idx = *features::feature_index(s->feature);
      svg::BoxSeries lo{s->feature + " low", {}, ""}, hi{s->feature + " high", {}, std::string(stats::stars(*s->eta_p_adj))};
      for (const auto& r : rows)
        if (std::string(corpus::to_string(r.condition)) == cond && r.values[idx])
          (r.group == corpus::GroupLabel::high ? hi : lo).values.push_back(*r.values[idx]);
      // z-score so features share one axis
      std::vector<double> all = lo.values;
      all.insert(all.end(), hi.values.begin(), hi.values.end());
      double m = 0.0, sd = 0.0;
      for (double v : all) m += v;
      m /= static_cast<double>(std::max<std::size_t>(all.size(), 1));
      for (double v : all) sd += (v - m) * (v - m);
      sd = all.size() > 1 ? std::sqrt(sd / static_cast<double>(all.size() - 1)) : 1.0;
      if (!(sd > 0.0)) sd = 1.0;
      for (auto* b : {&lo, &hi})
        for (auto& v : b->values) v = (v - m) / sd;
      boxes.push_back(std::move(lo));
      boxes.push_back(std::move(hi));
    }
    fig4.push_back(svg::box_plot(cond + ": features significant for rho and eta_p^2 (BH)", boxes, "z-score"));
  }
  svg::write(a.out / "fig4.svg", svg::stack(fig4));
  write_echo(a.out, "stats", {{"features", input(a.features)}}, g, cfg);

  std::size_t n_sig = 0;
  for (const auto& r : rep.rows)
    if (r.rho_p_adj && *r.rho_p_adj < 0.05) ++n_sig;
  for (const auto& cmp : rep.comparisons) {
    std::cout << cmp.statistic << ": " << cmp.condition_a << ' ' << fixed(cmp.mean_a, 3) << " +/- " << fixed(cmp.sd_a, 3)
              << " vs " << cmp.condition_b << ' ' << fixed(cmp.mean_b, 3) << " +/- " << fixed(cmp.sd_b, 3);
    if (cmp.paired) std::cout << ", paired t = " << fixed(cmp.paired->t, 3) << ", p = " << fixed(cmp.paired->p, 5);
    if (cmp.agreement.rho) std::cout << "; agreement rho = " << fixed(*cmp.agreement.rho, 3);
    std::cout << '\n';
  }
  std::cout << n_sig << " BH-significant correlations\n";
  return 0;
}

int cmd_explain(const Global& g, const ExplainArgs& a) {
  const auto& cfg = g.config;
  const auto rows = features::read_feature_table(a.features);
  make_dir(a.out);

  std::vector<explain::ImportanceReport> imps;
  json inputs = json::array();
  for (const auto& path : a.reports) {
    const auto rep = learn::EvalReport::from_json(learn::read_json(path));
    for (const auto& other : imps)
      if (other.condition == rep.condition) throw DataError("two reports for condition " + rep.condition);
    const auto ds = features::build_dataset(rows, features::parse_mode(rep.condition));
    learn::Algorithm alg;
    if (a.algorithm) {
      alg = learn::parse_algorithm(*a.algorithm);
    } else {
      const auto* best = rep.best();
      if (!best) throw DataError(path.string() + " has no algorithm results");
      alg = best->algorithm;
    }
    auto cv = config::cv_config(cfg, rep.seed, g.jobs);
    cv.budget = rep.budget;
    auto ec = cfg.explain;
    ec.seed = g.seed;
    ec.jobs = g.jobs;
    auto imp = explain::explain_report(ds, rep, alg, cv, ec);

    const std::string suffix = "_" + imp.condition;
    learn::write_json(a.out / ("importance" + suffix + ".json"), imp.to_json());
    imp.write_attribution_csv(a.out / ("attribution" + suffix + ".csv"));
    std::ofstream rank(a.out / ("ranking" + suffix + ".csv"));
    if (!rank) throw DataError("cannot write ranking" + suffix + ".csv");
    rank << "rank,feature,mean_abs_shapley,selection_frequency,robust\n";
    std::map<std::string, explain::FeatureFrequency> freq;
    for (const auto& f : imp.frequency) freq[f.name] = f;
    int r = 1;
    for (const auto& [name, v] : imp.ranking())
      rank << csv::join({std::to_string(r++), name, csv::format_number(v), csv::format_number(freq[name].frequency),
                         freq[name].robust ? "1" : "0"})
           << '\n';
    inputs.push_back({{"report", input(path)}, {"algorithm", std::string(learn::to_string(alg))}});
    std::cout << imp.condition << " (" << learn::to_string(alg) << ") top features by mean |Shapley|:";
    const auto ranking = imp.ranking();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranking.size()); ++i) std::cout << ' ' << ranking[i].first;
    std::cout << '\n';
    imps.push_back(std::move(imp));
  }

  auto acoustic_robust = [](const explain::ImportanceReport& imp) {
    std::vector<std::string> out;
    const auto acoustic = features::acoustic_names();
    for (const auto& f : imp.robust_features())
      if (std::find(acoustic.begin(), acoustic.end(), f) != acoustic.end()) out.push_back(f);
    return out;
  };
  std::set<std::string> common;
  if (imps.size() == 2) {
    const auto c = explain::common_features(acoustic_robust(imps[0]), imps[0].ranking(), acoustic_robust(imps[1]),
                                            imps[1].ranking());
    common.insert(c.common.begin(), c.common.end());
    learn::write_json(a.out / "common_features.json", {{"condition_a", imps[0].condition},
                                                       {"condition_b", imps[1].condition},
                                                       {"common", c.common},
                                                       {"fraction_a", c.fraction_a},
                                                       {"fraction_b", c.fraction_b}});
    std::cout << "common robust acoustic features: " << c.common.size() << " (" << fixed(100 * c.fraction_a, 1)
              << "% / " << fixed(100 * c.fraction_b, 1) << "% of mean |Shapley|)\n";
  }

  std::vector<std::string> panels;
  for (const auto& imp : imps) {
    const auto robust = imp.robust_features();
    const std::set<std::string> keep(robust.begin(), robust.end());
    std::vector<svg::Bar> bars;
    for (const auto& [name, v] : imp.ranking())
      if (keep.empty() ? bars.size() < 10 : keep.count(name) > 0) bars.push_back({name, v, common.count(name) > 0});
    panels.push_back(svg::bar_chart(imp.condition + ": " + (keep.empty() ? "top features" : "robust features") +
                                        " by mean |Shapley|",
                                    bars, "mean |Shapley value|"));
  }
  svg::write(a.out / "fig2.svg", svg::stack(panels));
  write_echo(a.out, "explain", {{"features", input(a.features)}, {"reports", inputs}}, g, cfg);
  return 0;
}

int cmd_synth(const Global& g, const SynthArgs& a) {
  synth::CorpusSpec spec;
  if (a.spec) {
    try {
      spec = synth::CorpusSpec::from_json(learn::read_json(*a.spec));
    } catch (const std::invalid_argument& e) {
      throw DataError(a.spec->string() + ": " + e.what());
    } catch (const json::exception& e) {
      throw DataError(a.spec->string() + ": " + e.what());
    }
  }
  if (g.seed_given) spec.seed = g.seed;
  make_dir(a.out);
  const auto manifest = synth::synth_corpus(spec, a.out, g.jobs);
  json args = {{"spec", spec.to_json()}};
  if (a.spec) args["spec_file"] = input(*a.spec);
  write_echo(a.out, "synth", args, g, g.config);
  std::cout << "wrote " << manifest.string() << '\n';
  return 0;
}

int cmd_report(const Global& g, const ReportArgs& a) {
  make_dir(a.out);
  std::ofstream csvf(a.out / "table.csv");
  std::ofstream md(a.out / "table.md");
  if (!csvf || !md) throw DataError("cannot write tables in " + a.out.string());
  csvf << "condition,algorithm,accuracy,sensitivity,specificity,f1,tp,fn,tn,fp,best,majority_rate\n";
  md << "| Condition | Algorithm | ACC | SEN | SPE | F1 |\n|---|---|---|---|---|---|\n";
  json inputs = json::array();
  for (const auto& path : a.reports) {
    const auto rep = learn::EvalReport::from_json(learn::read_json(path));
    const auto* best = rep.best();
    for (const auto& alg : rep.algorithms) {
      const bool is_best = &alg == best;
      const auto& m = alg.metrics;
      csvf << csv::join({rep.condition, std::string(learn::to_string(alg.algorithm)), fixed1(m.accuracy),
                         fixed1(m.sensitivity), fixed1(m.specificity), fixed1(m.f1), std::to_string(alg.pooled.tp),
                         std::to_string(alg.pooled.fn), std::to_string(alg.pooled.tn), std::to_string(alg.pooled.fp),
                         is_best ? "1" : "0", fixed1(rep.majority_rate())})
           << '\n';
      auto cell = [&](double v) { return is_best ? "**" + fixed1(v) + "**" : fixed1(v); };
      md << "| " << rep.condition << " | " << learn::to_string(alg.algorithm) << " | " << cell(m.accuracy) << " | "
         << cell(m.sensitivity) << " | " << cell(m.specificity) << " | " << cell(m.f1) << " |\n";
    }
    inputs.push_back(input(path));
  }
  csvf.close();
  md.close();
  write_echo(a.out, "report", {{"reports", inputs}}, g, g.config);
  std::ifstream back(a.out / "table.md");
  std::cout << back.rdbuf();
  return 0;
}

}  // namespace ecogvoice::cli
