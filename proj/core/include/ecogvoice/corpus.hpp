#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecogvoice::corpus {

// Mono PCM audio, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class Condition { cognitive, daily };
enum class Sex { female, male };
enum class GroupLabel { low = 0, high = 1 };

std::string_view to_string(Condition c);
std::string_view to_string(GroupLabel g);
Condition parse_condition(std::string_view s);

inline constexpr std::array<std::string_view, 5> kCognitiveQuestions = {
    "counting_backward", "subtraction", "phonemic_fluency", "semantic_fluency",
    "picture_description"};
inline constexpr std::array<std::string_view, 5> kDailyQuestions = {
    "childhood_activity", "dinner_menu", "risk_planning", "travel_planning",
    "general_knowledge"};

// Condition a task identifier belongs to; nullopt for unknown identifiers.
std::optional<Condition> condition_of_question(std::string_view question_id);

// Manifest column names for the seven neuropsychological scores.
inline constexpr std::array<std::string_view, 7> kNeuropsychTests = {
    "mmse", "fab", "cdt", "lm1", "lm2", "tmta", "tmtb"};

struct ResponseRecord {
  std::string participant_id;
  std::string question_id;
  Condition condition = Condition::cognitive;
  std::filesystem::path audio_path;
  double ecog_score = 1.0;
  double age = 0.0;
  Sex sex = Sex::female;
  double education = 0.0;
  std::map<std::string, double> neuropsych;  // keys from kNeuropsychTests
};

inline constexpr double kEcogMin = 1.0;
inline constexpr double kEcogMax = 4.0;
inline constexpr double kEcogCutoff = 1.81;

// high iff score >= 1.81. Throws std::invalid_argument outside [1, 4].
GroupLabel label_group(double ecog_score);

// Reads the CSV manifest. Relative audio paths resolve against the manifest's
// directory. Throws DataError naming the row (1-based, header excluded) and
// field for malformed input.
std::vector<ResponseRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path,
                   std::span<const ResponseRecord> records,
                   const std::filesystem::path& relative_to = {});

// RIFF/WAVE reader: PCM 16-bit, IEEE float 32/64, any channel count
// (averaged to mono). Throws DataError for other codecs or empty data.
AudioClip load_audio(const std::filesystem::path& path);
// 16-bit PCM mono writer; samples are clipped to [-1, 32767/32768].
void save_wav16(const std::filesystem::path& path, const AudioClip& clip);

struct VadConfig {
  double drop_db = 35.0;        // threshold below the loudest frame
  double min_segment_ms = 100.0;
  double pad_ms = 50.0;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double floor_dbfs = -90.0;    // frames below this are never speech
};

// Energy-gated silence removal. Throws DataError("no voiced content") when
// nothing survives the gate.
AudioClip remove_silence(const AudioClip& clip, const VadConfig& config = {});

// Frame length and hop in samples for a duration in ms at a sample rate;
// 25 ms / 10 ms at 44.1 kHz gives 1102 / 441.
int samples_for_ms(double ms, int sample_rate);

}  // namespace ecogvoice::corpus
