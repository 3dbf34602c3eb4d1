#pragma once

#include <random>
#include <string>
#include <vector>

#include "ecogvoice/features.hpp"
#include "ecogvoice/rng.hpp"

namespace toy {

// Participants with several rows each; columns 0 and 1 carry the label.
inline ecogvoice::features::Dataset dataset(int participants = 20, int per = 5, int cols = 6,
                                            std::uint64_t seed = 1) {
  ecogvoice::Rng rng(seed);
  std::normal_distribution<double> z;
  ecogvoice::features::Dataset ds;
  for (int c = 0; c < cols; ++c) ds.feature_names.push_back("f" + std::to_string(c));
  int n = participants * per;
  ds.x.resize(n, cols);
  for (int p = 0; p < participants; ++p) {
    int label = p % 5 < 3;
    std::string id = "P" + std::to_string(100 + p);
    for (int k = 0; k < per; ++k) {
      int r = p * per + k;
      for (int c = 0; c < cols; ++c) ds.x(r, c) = z(rng);
      ds.x(r, 0) += label ? 1.5 : -1.5;
      ds.x(r, 1) += label ? 1.0 : -1.0;
      ds.y.push_back(label);
      ds.participant.push_back(id);
      ds.question.push_back("q" + std::to_string(k));
      ds.ecog.push_back(label ? 2.5 : 1.5);
    }
  }
  return ds;
}

// Feature rows for both conditions whose acoustic values ignore ECog.
inline std::vector<ecogvoice::features::FeatureVector> null_rows(int participants, int per, std::uint64_t seed) {
  using namespace ecogvoice;
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(1.0, 3.5);
  std::vector<features::FeatureVector> rows;
  for (int p = 0; p < participants; ++p) {
    double ecog = u(rng);
    double age = 65.0 + 8.0 * z(rng);
    double sex = p % 2;
    double edu = 12.0 + 3.0 * z(rng);
    for (auto cond : {corpus::Condition::cognitive, corpus::Condition::daily}) {
      for (int k = 0; k < per; ++k) {
        features::FeatureVector fv;
        fv.participant_id = "P" + std::to_string(p);
        fv.question_id = "q" + std::to_string(k);
        fv.condition = cond;
        fv.ecog = ecog;
        fv.group = corpus::label_group(ecog);
        for (std::size_t c = 0; c < features::kAcousticCount; ++c) fv.values[c] = z(rng);
        fv.values[42] = age;
        fv.values[43] = sex;
        fv.values[44] = edu;
        rows.push_back(fv);
      }
    }
  }
  return rows;
}

}  // namespace toy
