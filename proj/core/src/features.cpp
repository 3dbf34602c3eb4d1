#include "ecogvoice/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"
#include "ecogvoice/parallel.hpp"

namespace ecogvoice::features {

namespace {

constexpr std::size_t kIdxPitch = 36;
constexpr std::size_t kIdxF1 = 37;
constexpr std::size_t kIdxF2 = 38;
constexpr std::size_t kIdxJitter = 39;
constexpr std::size_t kIdxShimmer = 40;
constexpr std::size_t kIdxHnr = 41;
constexpr std::size_t kIdxAge = 42;
constexpr std::size_t kIdxSex = 43;
constexpr std::size_t kIdxEducation = 44;

std::vector<std::string> make_names() {
  std::vector<std::string> names;
  for (const char* prefix : {"mfcc_var_", "dmfcc_var_", "ddmfcc_var_"})
    for (int i = 0; i < 12; ++i) names.push_back(prefix + std::to_string(i));
  for (const char* n : {"pitch_variation", "f1_mean", "f2_mean", "jitter", "shimmer", "hnr", "age",
                        "sex", "education"})
    names.emplace_back(n);
  return names;
}

// Population variance of each column.
Eigen::VectorXd column_variance(const Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  return ((m.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(m.rows()))
      .transpose();
}

std::optional<double> parse_cell(const std::string& s, std::size_t row, const std::string& col) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("feature table row " + std::to_string(row) + ", column '" + col +
                    "': not a number: '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = make_names();
  return names;
}

std::span<const std::string> acoustic_names() {
  return std::span<const std::string>(feature_names()).first(kAcousticCount);
}

std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

double encode_sex(corpus::Sex s) { return s == corpus::Sex::female ? 1.0 : 0.0; }

std::optional<double> FeatureVector::get(std::string_view name) const {
  const auto i = feature_index(name);
  if (!i) return std::nullopt;
  return values[*i];
}

FeatureVector FeatureVector::from_record(const corpus::ResponseRecord& record) {
  FeatureVector fv;
  fv.participant_id = record.participant_id;
  fv.question_id = record.question_id;
  fv.condition = record.condition;
  fv.ecog = record.ecog_score;
  fv.group = corpus::label_group(record.ecog_score);
  fv.neuropsych = record.neuropsych;
  fv.values[kIdxAge] = record.age;
  fv.values[kIdxSex] = encode_sex(record.sex);
  fv.values[kIdxEducation] = record.education;
  return fv;
}

FeatureVector extract_from_clip(const corpus::ResponseRecord& record, const corpus::AudioClip& clip,
                                const ExtractionConfig& config) {
  FeatureVector fv = FeatureVector::from_record(record);
  const corpus::AudioClip voiced = corpus::remove_silence(clip, config.vad);

  if (dsp::frame_count(voiced.samples.size(),
                       corpus::samples_for_ms(config.mfcc.frame_ms, voiced.sample_rate),
                       corpus::samples_for_ms(config.mfcc.hop_ms, voiced.sample_rate)) > 0) {
    const auto m = dsp::mfcc(voiced, config.mfcc);
    const auto d1 = dsp::sg_derivative(m, 1, config.sg);
    const auto d2 = dsp::sg_derivative(m, 2, config.sg);
    const auto n = static_cast<std::size_t>(std::min<Eigen::Index>(12, m.coefficients()));
    const Eigen::VectorXd v0 = column_variance(m.values);
    const Eigen::VectorXd v1 = column_variance(d1.values);
    const Eigen::VectorXd v2 = column_variance(d2.values);
    for (std::size_t i = 0; i < n; ++i) {
      fv.values[i] = v0(static_cast<Eigen::Index>(i));
      fv.values[12 + i] = v1(static_cast<Eigen::Index>(i));
      fv.values[24 + i] = v2(static_cast<Eigen::Index>(i));
    }
  }

  const auto track = dsp::pitch_track(voiced, config.pitch);
  std::vector<double> f0;
  for (const auto& f : track.f0)
    if (f) f0.push_back(*f);
  if (!f0.empty()) {
    double mean = 0.0;
    for (double v : f0) mean += v;
    mean /= static_cast<double>(f0.size());
    double ss = 0.0;
    for (double v : f0) ss += (v - mean) * (v - mean);
    fv.values[kIdxPitch] = std::sqrt(ss / static_cast<double>(f0.size()));

    if (const auto fm = dsp::formants(voiced, track, config.formant)) {
      fv.values[kIdxF1] = fm->f1_mean;
      fv.values[kIdxF2] = fm->f2_mean;
    }
    const auto periods = vq::track_periods(voiced, track, config.marks);
    fv.values[kIdxJitter] = vq::jitter(periods);
    fv.values[kIdxShimmer] = vq::shimmer(periods);
    fv.values[kIdxHnr] = vq::hnr(voiced, track);
  }
  return fv;
}

FeatureVector extract_features(const corpus::ResponseRecord& record, const ExtractionConfig& config) {
  return extract_from_clip(record, corpus::load_audio(record.audio_path), config);
}

ExtractionResult extract_all(std::span<const corpus::ResponseRecord> records,
                             const ExtractionConfig& config, int jobs) {
  std::vector<std::optional<FeatureVector>> out(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = extract_features(records[i], config);
    } catch (const DataError& e) {
      errors[i] = e.what();
    } catch (const std::invalid_argument& e) {
      errors[i] = e.what();
    }
  });
  ExtractionResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (out[i])
      result.rows.push_back(std::move(*out[i]));
    else
      result.skipped.push_back({records[i].participant_id, records[i].question_id, errors[i]});
  }
  return result;
}

void write_feature_table(const std::filesystem::path& path, std::span<const FeatureVector> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<std::string> header = {"participant_id", "question_id", "condition", "ecog", "group"};
  for (auto n : corpus::kNeuropsychTests) header.emplace_back(n);
  for (const auto& n : feature_names()) header.push_back(n);
  out << csv::join(header) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.participant_id, r.question_id,
                                  std::string(corpus::to_string(r.condition)),
                                  csv::format_number(r.ecog), std::string(corpus::to_string(r.group))};
    for (auto n : corpus::kNeuropsychTests) {
      auto it = r.neuropsych.find(std::string(n));
      f.push_back(it == r.neuropsych.end() ? std::string() : csv::format_number(it->second));
    }
    for (const auto& v : r.values) f.push_back(v ? csv::format_number(*v) : std::string());
    out << csv::join(f) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<FeatureVector> read_feature_table(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header.empty()) throw DataError("empty feature table " + path.string());
  const std::size_t c_pid = table.column("participant_id");
  const std::size_t c_qid = table.column("question_id");
  const std::size_t c_cond = table.column("condition");
  const std::size_t c_ecog = table.column("ecog");
  std::vector<std::size_t> c_feat;
  for (const auto& n : feature_names()) c_feat.push_back(table.column(n));
  std::vector<std::pair<std::string, std::size_t>> c_np;
  for (auto n : corpus::kNeuropsychTests)
    if (table.has_column(n)) c_np.emplace_back(std::string(n), table.column(n));

  std::vector<FeatureVector> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError("feature table row " + std::to_string(r + 1) + ": wrong field count");
    FeatureVector fv;
    fv.participant_id = row[c_pid];
    fv.question_id = row[c_qid];
    fv.condition = corpus::parse_condition(row[c_cond]);
    const auto ecog = parse_cell(row[c_ecog], r + 1, "ecog");
    if (!ecog) throw DataError("feature table row " + std::to_string(r + 1) + ": missing ecog");
    fv.ecog = *ecog;
    try {
      fv.group = corpus::label_group(fv.ecog);
    } catch (const std::invalid_argument&) {
      throw DataError("feature table row " + std::to_string(r + 1) + ": ecog_score out of range");
    }
    for (const auto& [name, c] : c_np)
      if (auto v = parse_cell(row[c], r + 1, name)) fv.neuropsych[name] = *v;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      fv.values[i] = parse_cell(row[c_feat[i]], r + 1, feature_names()[i]);
    rows.push_back(std::move(fv));
  }
  return rows;
}

std::string_view to_string(DatasetMode m) {
  switch (m) {
    case DatasetMode::cognitive: return "cognitive";
    case DatasetMode::daily: return "daily";
    case DatasetMode::neuropsych: return "neuropsych";
  }
  return "cognitive";
}

DatasetMode parse_mode(std::string_view s) {
  if (s == "cognitive") return DatasetMode::cognitive;
  if (s == "daily") return DatasetMode::daily;
  if (s == "neuropsych") return DatasetMode::neuropsych;
  throw DataError("unknown condition '" + std::string(s) + "' (cognitive, daily, neuropsych)");
}

std::vector<std::string> Dataset::participants() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : participant)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

Dataset build_dataset(std::span<const FeatureVector> rows, DatasetMode mode) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Dataset ds;
  ds.mode = mode;
  if (mode == DatasetMode::neuropsych) {
    for (auto n : corpus::kNeuropsychTests) ds.feature_names.emplace_back(n);
    for (std::size_t i = kIdxAge; i <= kIdxEducation; ++i) ds.feature_names.push_back(feature_names()[i]);

    std::vector<const FeatureVector*> firsts;
    std::set<std::string> seen;
    for (const auto& r : rows)
      if (seen.insert(r.participant_id).second) firsts.push_back(&r);
    std::vector<std::vector<double>> kept;
    for (const auto* r : firsts) {
      std::vector<double> v;
      bool complete = true;
      for (auto n : corpus::kNeuropsychTests) {
        auto it = r->neuropsych.find(std::string(n));
        if (it == r->neuropsych.end()) {
          complete = false;
          break;
        }
        v.push_back(it->second);
      }
      if (!complete) {
        ++ds.excluded;
        continue;
      }
      for (std::size_t i = kIdxAge; i <= kIdxEducation; ++i) v.push_back(r->values[i].value_or(nan));
      kept.push_back(std::move(v));
      ds.y.push_back(r->group == corpus::GroupLabel::high ? 1 : 0);
      ds.participant.push_back(r->participant_id);
      ds.question.emplace_back();
      ds.ecog.push_back(r->ecog);
    }
    ds.x.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(ds.feature_names.size()));
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = 0; j < kept[i].size(); ++j)
        ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
  } else {
    const auto want = mode == DatasetMode::cognitive ? corpus::Condition::cognitive
                                                     : corpus::Condition::daily;
    ds.feature_names = feature_names();
    std::vector<const FeatureVector*> sel;
    for (const auto& r : rows)
      if (r.condition == want) sel.push_back(&r);
    ds.x.resize(static_cast<Eigen::Index>(sel.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < sel.size(); ++i) {
      const auto& r = *sel[i];
      for (std::size_t j = 0; j < kFeatureCount; ++j)
        ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.values[j].value_or(nan);
      ds.y.push_back(r.group == corpus::GroupLabel::high ? 1 : 0);
      ds.participant.push_back(r.participant_id);
      ds.question.push_back(r.question_id);
      ds.ecog.push_back(r.ecog);
    }
  }
  if (ds.rows() == 0)
    throw DataError("no rows for condition " + std::string(to_string(mode)));
  return ds;
}

}  // namespace ecogvoice::features
