#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ecogvoice::learn {

enum class Algorithm { knn, logreg, svm, gbt_a, gbt_b };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
std::span<const Algorithm> all_algorithms();

using ParamValue = std::variant<double, std::string>;
using HyperConfig = std::map<std::string, ParamValue>;

enum class ParamKind {
  uniform,      // real in [lo, hi]
  log_uniform,  // real, sampled uniformly in log space
  int_uniform,  // integer in [lo, hi]
  log_int,      // integer, sampled in log space then rounded
  categorical,
};

struct ParamDomain {
  std::string name;
  ParamKind kind = ParamKind::uniform;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<ParamValue> choices;  // categorical only

  bool contains(const ParamValue& v) const;
  bool is_log() const { return kind == ParamKind::log_uniform || kind == ParamKind::log_int; }
  bool is_int() const { return kind == ParamKind::int_uniform || kind == ParamKind::log_int; }
};

struct HyperSpace {
  std::vector<ParamDomain> params;

  const ParamDomain* find(std::string_view name) const;
  // Every declared parameter present and inside its domain.
  bool contains(const HyperConfig& config) const;
};

// Classifier hyperparameters for one algorithm.
HyperSpace model_space(Algorithm a);
// Boruta tunables, named "boruta.percentile" and "boruta.n_trees".
HyperSpace boruta_space();
// Boruta tunables followed by the classifier's, searched jointly.
HyperSpace joint_space(Algorithm a);

double get_number(const HyperConfig& c, const std::string& name);
int get_int(const HyperConfig& c, const std::string& name);
const std::string& get_string(const HyperConfig& c, const std::string& name);

nlohmann::json to_json(const HyperConfig& c);
HyperConfig config_from_json(const nlohmann::json& j);

}  // namespace ecogvoice::learn
