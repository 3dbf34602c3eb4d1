#pragma once

#include <span>

#include <nlohmann/json.hpp>

namespace ecogvoice::learn {

// Positive class = high.
struct Confusion {
  int tp = 0, fn = 0, tn = 0, fp = 0;

  int n() const { return tp + fn + tn + fp; }
  Confusion& operator+=(const Confusion& o);
  bool operator==(const Confusion&) const = default;
};

Confusion confusion(std::span<const int> truth, std::span<const int> predicted);

// Percentages; NaN when a denominator is zero.
struct Metrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
};

Metrics compute_metrics(const Confusion& c);

// Half-away-from-zero rounding to one decimal, as printed in reports.
double round1(double v);

nlohmann::json to_json(const Confusion& c);
Confusion confusion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Metrics& m);

}  // namespace ecogvoice::learn
