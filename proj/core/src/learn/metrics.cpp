#include "ecogvoice/learn/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecogvoice::learn {

namespace {

double pct(double num, double den) {
  return den > 0.0 ? 100.0 * num / den : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json() : nlohmann::json(v); }

}  // namespace

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fn += o.fn;
  tn += o.tn;
  fp += o.fp;
  return *this;
}

Confusion confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i])
      (predicted[i] ? c.tp : c.fn)++;
    else
      (predicted[i] ? c.fp : c.tn)++;
  }
  return c;
}

Metrics compute_metrics(const Confusion& c) {
  Metrics m;
  m.accuracy = pct(c.tp + c.tn, c.n());
  m.sensitivity = pct(c.tp, c.tp + c.fn);
  m.specificity = pct(c.tn, c.tn + c.fp);
  m.f1 = pct(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn);
  return m;
}

double round1(double v) {
  if (std::isnan(v)) return v;
  return std::round(v * 10.0) / 10.0;
}

nlohmann::json to_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fn", c.fn}, {"tn", c.tn}, {"fp", c.fp}};
}

Confusion confusion_from_json(const nlohmann::json& j) {
  Confusion c;
  c.tp = j.at("tp").get<int>();
  c.fn = j.at("fn").get<int>();
  c.tn = j.at("tn").get<int>();
  c.fp = j.at("fp").get<int>();
  return c;
}

nlohmann::json to_json(const Metrics& m) {
  return {{"accuracy", number_or_null(m.accuracy)},
          {"sensitivity", number_or_null(m.sensitivity)},
          {"specificity", number_or_null(m.specificity)},
          {"f1", number_or_null(m.f1)}};
}

}  // namespace ecogvoice::learn
