#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ecogvoice/features.hpp"

namespace ecogvoice::stats {

// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> v);

struct Correlation {
  std::optional<double> rho;  // nullopt when undefined (constant input)
  std::optional<double> p;
  std::size_t n = 0;          // rows used
};

Correlation spearman(std::span<const double> x, std::span<const double> y);

// Ranks x, y and every covariate column, regresses ranked x and y on the
// ranked covariates plus an intercept and correlates the residuals.
// p uses a t distribution with n - k - 2 degrees of freedom. Rows with any
// NaN are dropped. When a residual vanishes because the covariates explain
// the variable completely, rho is 0 with p = 1.
Correlation partial_spearman(std::span<const double> x, std::span<const double> y,
                             const Eigen::MatrixXd& covariates);

struct EtaResult {
  double eta_sq = 0.0;
  double f = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// One-way ANCOVA on a binary group. Rows with NaN are dropped. Throws
// DataError for a rank-deficient design, naming the collinear columns
// (`covariate_names` label the covariate columns; "intercept" and "group"
// name the rest).
EtaResult ancova_eta(std::span<const double> y, std::span<const int> group, const Eigen::MatrixXd& covariates,
                     const std::vector<std::string>& covariate_names = {});

// Benjamini-Hochberg step-up adjusted p-values in input order.
std::vector<double> bh_adjust(std::span<const double> p);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Two-sided paired t test. Throws DataError when the differences have zero variance.
TTest paired_t(std::span<const double> a, std::span<const double> b);

// Plain Spearman between two coefficient vectors.
Correlation agreement(std::span<const double> a, std::span<const double> b);

// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, else "".
std::string_view stars(double p);

enum class Unit { response, participant };
std::string_view to_string(Unit u);
Unit parse_unit(std::string_view s);

struct FeatureStats {
  std::string feature;
  std::string condition;
  std::size_t n = 0;
  std::optional<double> rho;
  std::optional<double> rho_p;
  std::optional<double> rho_p_adj;
  std::optional<double> eta_sq;
  std::optional<double> eta_p;
  std::optional<double> eta_p_adj;
};

struct ConditionComparison {
  std::string statistic;  // "abs_rho" or "eta_sq"
  std::string condition_a;
  std::string condition_b;
  std::size_t n_features = 0;
  double mean_a = 0.0, sd_a = 0.0, mean_b = 0.0, sd_b = 0.0;
  std::optional<TTest> paired;          // on |rho| or eta_sq
  Correlation agreement;                // Spearman of the signed coefficient vectors
};

struct StatsConfig {
  Unit unit = Unit::response;
  std::vector<std::string> features;  // empty = the 42 acoustic features
};

struct StatsReport {
  Unit unit = Unit::response;
  std::vector<std::string> conditions;
  std::vector<std::string> features;
  std::vector<FeatureStats> rows;              // condition-major
  std::vector<ConditionComparison> comparisons;

  const FeatureStats* find(std::string_view feature, std::string_view condition) const;
  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& path) const;
};

// Per-condition partial Spearman with ECog and ANCOVA eta squared between
// groups, both adjusted for age, sex and education, BH-corrected within
// each (condition, statistic) family, then compared across conditions.
StatsReport run_stats(std::span<const features::FeatureVector> rows, const StatsConfig& config = {});

}  // namespace ecogvoice::stats
