#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecogvoice/config.hpp"

namespace ecogvoice::cli {

struct Global {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
  std::string config_path;
  config::RunConfig config;
};

struct ExtractArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::optional<double> vad_drop_db, vad_min_segment_ms, vad_pad_ms;
};

struct EvaluateArgs {
  std::filesystem::path features;
  std::string condition;
  std::vector<std::string> algorithms;
  std::optional<int> budget;
  std::filesystem::path out;
};

struct StatsArgs {
  std::filesystem::path features;
  std::filesystem::path out;
  std::optional<std::string> unit;
};

struct ExplainArgs {
  std::filesystem::path features;
  std::vector<std::filesystem::path> reports;  // one or two conditions
  std::optional<std::string> algorithm;
  std::filesystem::path out;
};

struct SynthArgs {
  std::optional<std::filesystem::path> spec;
  std::filesystem::path out;
};

struct ReportArgs {
  std::vector<std::filesystem::path> reports;
  std::filesystem::path out;
};

int cmd_extract(const Global& g, const ExtractArgs& a);
int cmd_evaluate(const Global& g, const EvaluateArgs& a);
int cmd_stats(const Global& g, const StatsArgs& a);
int cmd_explain(const Global& g, const ExplainArgs& a);
int cmd_synth(const Global& g, const SynthArgs& a);
int cmd_report(const Global& g, const ReportArgs& a);

}  // namespace ecogvoice::cli
