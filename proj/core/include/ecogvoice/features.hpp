#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ecogvoice/corpus.hpp"
#include "ecogvoice/dsp.hpp"
#include "ecogvoice/voicequality.hpp"

namespace ecogvoice::features {

inline constexpr std::size_t kAcousticCount = 42;
inline constexpr std::size_t kFeatureCount = 45;  // 42 acoustic + age, sex, education

// mfcc_var_0..11, dmfcc_var_0..11, ddmfcc_var_0..11, pitch_variation,
// f1_mean, f2_mean, jitter, shimmer, hnr, age, sex, education.
const std::vector<std::string>& feature_names();
std::span<const std::string> acoustic_names();
std::optional<std::size_t> feature_index(std::string_view name);

// Sex is encoded female -> 1, male -> 0.
double encode_sex(corpus::Sex s);

struct FeatureVector {
  std::string participant_id;
  std::string question_id;
  corpus::Condition condition = corpus::Condition::cognitive;
  double ecog = 1.0;
  corpus::GroupLabel group = corpus::GroupLabel::low;
  std::map<std::string, double> neuropsych;
  std::array<std::optional<double>, kFeatureCount> values{};  // nullopt = missing

  std::optional<double> get(std::string_view name) const;

  // Metadata and demographics from the record; every acoustic cell missing.
  static FeatureVector from_record(const corpus::ResponseRecord& record);
};

struct ExtractionConfig {
  corpus::VadConfig vad;
  dsp::MfccConfig mfcc;
  dsp::SgConfig sg;
  dsp::PitchConfig pitch;
  dsp::FormantConfig formant;
  vq::MarkConfig marks;
};

// Acoustic features of an already-loaded clip. Silence removal runs first and
// its DataError propagates.
FeatureVector extract_from_clip(const corpus::ResponseRecord& record, const corpus::AudioClip& clip,
                                const ExtractionConfig& config = {});

FeatureVector extract_features(const corpus::ResponseRecord& record,
                               const ExtractionConfig& config = {});

struct SkippedRecord {
  std::string participant_id;
  std::string question_id;
  std::string reason;
};

struct ExtractionResult {
  std::vector<FeatureVector> rows;     // manifest order, failures removed
  std::vector<SkippedRecord> skipped;
};

ExtractionResult extract_all(std::span<const corpus::ResponseRecord> records,
                             const ExtractionConfig& config = {}, int jobs = 1);

// Columns: participant_id, question_id, condition, ecog, group, the seven
// neuropsychological scores, then the 45 feature names. Missing cells empty.
void write_feature_table(const std::filesystem::path& path, std::span<const FeatureVector> rows);
std::vector<FeatureVector> read_feature_table(const std::filesystem::path& path);

enum class DatasetMode { cognitive, daily, neuropsych };

std::string_view to_string(DatasetMode m);
DatasetMode parse_mode(std::string_view s);

// Model-ready matrix. NaN marks a missing cell; imputation happens inside the
// learning pipeline on training folds only.
struct Dataset {
  DatasetMode mode = DatasetMode::cognitive;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd x;                      // rows x features
  std::vector<int> y;                     // 1 = high (positive class)
  std::vector<std::string> participant;   // per row
  std::vector<std::string> question;      // per row; empty in neuropsych mode
  std::vector<double> ecog;               // per row
  std::size_t excluded = 0;               // rows dropped while building

  std::size_t rows() const { return y.size(); }
  std::size_t features() const { return feature_names.size(); }
  // Distinct participants in first-appearance order.
  std::vector<std::string> participants() const;
};

// Cognitive/daily: one row per response of that condition, 45 columns.
// Neuropsych: one row per participant with the 7 scores + 3 demographics;
// participants missing any score are excluded and counted.
// Throws DataError when nothing remains.
Dataset build_dataset(std::span<const FeatureVector> rows, DatasetMode mode);

}  // namespace ecogvoice::features
