#include "ecogvoice/learn/folds.hpp"

#include <algorithm>
#include <set>

#include "ecogvoice/error.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

namespace {

ParticipantFolds deal(const std::vector<std::string>& ids, const std::map<std::string, int>& labels, int k,
                      std::uint64_t seed) {
  std::vector<std::string> high, low;
  for (const auto& id : ids) (labels.at(id) ? high : low).push_back(id);
  Rng rng(seed);
  std::shuffle(high.begin(), high.end(), rng);
  std::shuffle(low.begin(), low.end(), rng);
  ParticipantFolds folds(static_cast<std::size_t>(k));
  std::size_t slot = 0;
  for (const auto& id : high) folds[slot++ % static_cast<std::size_t>(k)].push_back(id);
  for (const auto& id : low) folds[slot++ % static_cast<std::size_t>(k)].push_back(id);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace

std::map<std::string, int> participant_labels(const features::Dataset& ds) {
  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    auto [it, fresh] = labels.emplace(ds.participant[i], ds.y[i]);
    if (!fresh && it->second != ds.y[i])
      throw DataError("participant " + ds.participant[i] + " has rows with different group labels");
  }
  return labels;
}

FoldPlan make_fold_plan(const features::Dataset& ds, std::uint64_t seed, int n_outer, int n_inner) {
  const auto labels = participant_labels(ds);
  std::vector<std::string> ids;
  int n_high = 0;
  for (const auto& [id, y] : labels) {
    ids.push_back(id);
    n_high += y;
  }
  if (static_cast<int>(ids.size()) < n_outer)
    throw DataError("need at least " + std::to_string(n_outer) + " participants for " + std::to_string(n_outer) +
                    "-fold cross-validation, got " + std::to_string(ids.size()));
  if (n_high == 0 || n_high == static_cast<int>(ids.size()))
    throw DataError("both groups must be represented to build a stratified fold plan");

  FoldPlan plan;
  plan.seed = seed;
  plan.outer = deal(ids, labels, n_outer, derive_seed(seed, {tag(SeedTag::fold_plan)}));
  for (int f = 0; f < n_outer; ++f) {
    std::vector<std::string> train;
    const std::set<std::string> test(plan.outer[static_cast<std::size_t>(f)].begin(),
                                     plan.outer[static_cast<std::size_t>(f)].end());
    for (const auto& id : ids)
      if (!test.count(id)) train.push_back(id);
    plan.inner.push_back(
        deal(train, labels, n_inner, derive_seed(seed, {tag(SeedTag::inner_plan), static_cast<std::uint64_t>(f)})));
  }
  return plan;
}

std::vector<std::size_t> rows_of(const features::Dataset& ds, const std::vector<std::string>& participants) {
  const std::set<std::string> want(participants.begin(), participants.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.rows(); ++i)
    if (want.count(ds.participant[i])) rows.push_back(i);
  return rows;
}

nlohmann::json FoldPlan::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["outer"] = outer;
  j["inner"] = inner;
  return j;
}

FoldPlan FoldPlan::from_json(const nlohmann::json& j) {
  FoldPlan p;
  try {
    p.seed = j.at("seed").get<std::uint64_t>();
    p.outer = j.at("outer").get<ParticipantFolds>();
    p.inner = j.at("inner").get<std::vector<ParticipantFolds>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fold plan: ") + e.what());
  }
  if (p.inner.size() != p.outer.size()) throw DataError("fold plan: inner/outer fold count mismatch");
  return p;
}

void FoldPlan::validate(const features::Dataset& ds) const {
  const auto labels = participant_labels(ds);
  std::set<std::string> seen;
  for (const auto& f : outer)
    for (const auto& id : f) {
      if (!labels.count(id)) throw DataError("fold plan names unknown participant " + id);
      if (!seen.insert(id).second) throw DataError("participant " + id + " appears in two outer folds");
    }
  if (seen.size() != labels.size()) throw DataError("fold plan does not cover every participant");
  if (inner.size() != outer.size()) throw DataError("fold plan: inner/outer fold count mismatch");
  for (std::size_t f = 0; f < outer.size(); ++f) {
    std::set<std::string> train;
    for (const auto& [id, y] : labels) train.insert(id);
    for (const auto& id : outer[f]) train.erase(id);
    std::set<std::string> covered;
    for (const auto& g : inner[f])
      for (const auto& id : g)
        if (!train.count(id) || !covered.insert(id).second)
          throw DataError("inner split of outer fold " + std::to_string(f) + " is not a partition of its training set");
    if (covered.size() != train.size())
      throw DataError("inner split of outer fold " + std::to_string(f) + " misses training participants");
  }
}

}  // namespace ecogvoice::learn
