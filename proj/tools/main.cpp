#include <cstdio>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ecogvoice/error.hpp"

using namespace ecogvoice;

int main(int argc, char** argv) {
  CLI::App app{"Voice-feature pipeline for subjective cognitive decline screening"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "0.1.0");

  cli::Global g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed for every random stage")->default_val(0);
  app.add_option("--jobs", g.jobs, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);

  cli::ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Acoustic feature table from a manifest");
  extract->add_option("--manifest", ex.manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "Output directory")->required();
  extract->add_option("--vad-drop-db", ex.vad_drop_db, "Energy gate below the loudest frame (dB)");
  extract->add_option("--vad-min-segment-ms", ex.vad_min_segment_ms, "Shortest kept segment (ms)");
  extract->add_option("--vad-pad-ms", ex.vad_pad_ms, "Padding around kept segments (ms)");

  cli::EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Nested cross-validation of the classifiers");
  evaluate->add_option("--features", ev.features, "Feature table CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--condition", ev.condition, "cognitive, daily or neuropsych")
      ->required()
      ->check(CLI::IsMember({"cognitive", "daily", "neuropsych"}));
  evaluate->add_option("--algorithms", ev.algorithms, "Subset of knn,logreg,svm,gbt-a,gbt-b")
      ->delimiter(',')
      ->check(CLI::IsMember({"knn", "logreg", "svm", "gbt-a", "gbt-b"}));
  evaluate->add_option("--budget", ev.budget, "TPE trials per outer fold")->check(CLI::PositiveNumber);
  evaluate->add_option("--out", ev.out, "Output directory")->required();

  cli::StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Covariate-adjusted correlations and effect sizes");
  stats->add_option("--features", st.features, "Feature table CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--unit", st.unit, "response or participant")->check(CLI::IsMember({"response", "participant"}));
  stats->add_option("--out", st.out, "Output directory")->required();

  cli::ExplainArgs xp;
  auto* explain = app.add_subcommand("explain", "Selection frequency and Shapley attribution");
  explain->add_option("--features", xp.features, "Feature table CSV")->required()->check(CLI::ExistingFile);
  explain->add_option("--report", xp.reports, "eval_report.json; give two to compare conditions")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingFile);
  explain->add_option("--algorithm", xp.algorithm, "Model to explain (default: best in report)")
      ->check(CLI::IsMember({"knn", "logreg", "svm", "gbt-a", "gbt-b"}));
  explain->add_option("--out", xp.out, "Output directory")->required();

  cli::SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Synthetic corpus with known ground truth");
  synth->add_option("--spec", sy.spec, "Corpus spec JSON (default: paper-shaped null corpus)")->check(CLI::ExistingFile);
  synth->add_option("--out", sy.out, "Output directory")->required();

  cli::ReportArgs rp;
  auto* report = app.add_subcommand("report", "Table of metrics across evaluation reports");
  report->add_option("--eval", rp.reports, "eval_report.json (repeatable)")->required()->check(CLI::ExistingFile);
  report->add_option("--out", rp.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    g.seed_given = seed_opt->count() > 0;
    if (!g.config_path.empty()) g.config = config::load(g.config_path);
    if (*extract) return cli::cmd_extract(g, ex);
    if (*evaluate) return cli::cmd_evaluate(g, ev);
    if (*stats) return cli::cmd_stats(g, st);
    if (*explain) return cli::cmd_explain(g, xp);
    if (*synth) return cli::cmd_synth(g, sy);
    if (*report) return cli::cmd_report(g, rp);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
