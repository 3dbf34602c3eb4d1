#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ecogvoice/explain.hpp"
#include "ecogvoice/features.hpp"
#include "ecogvoice/learn/nested_cv.hpp"
#include "ecogvoice/stats.hpp"

namespace ecogvoice::config {

// Every tunable of a pipeline run. A config file is a JSON object with any
// subset of these sections; omitted keys keep their defaults and unknown
// keys are rejected.
struct RunConfig {
  features::ExtractionConfig extract;
  int budget = 50;
  learn::InnerMetric metric = learn::InnerMetric::accuracy;
  learn::BorutaConfig boruta;
  learn::TpeConfig tpe;
  explain::ExplainConfig explain;  // jobs is taken from the command line
  stats::Unit stats_unit = stats::Unit::response;
};

nlohmann::json to_json(const RunConfig& c);
// Throws DataError on unknown keys or wrong types, naming the dotted key.
RunConfig from_json(const nlohmann::json& j);
RunConfig load(const std::filesystem::path& path);

learn::NestedCvConfig cv_config(const RunConfig& c, std::uint64_t seed, int jobs);

}  // namespace ecogvoice::config
