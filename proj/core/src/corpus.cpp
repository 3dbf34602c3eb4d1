#include "ecogvoice/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"

namespace ecogvoice::corpus {

std::string_view to_string(Condition c) {
  return c == Condition::cognitive ? "cognitive" : "daily";
}

std::string_view to_string(GroupLabel g) { return g == GroupLabel::high ? "high" : "low"; }

Condition parse_condition(std::string_view s) {
  if (s == "cognitive") return Condition::cognitive;
  if (s == "daily") return Condition::daily;
  throw DataError("unknown condition '" + std::string(s) + "'");
}

std::optional<Condition> condition_of_question(std::string_view question_id) {
  if (std::find(kCognitiveQuestions.begin(), kCognitiveQuestions.end(), question_id) !=
      kCognitiveQuestions.end())
    return Condition::cognitive;
  if (std::find(kDailyQuestions.begin(), kDailyQuestions.end(), question_id) !=
      kDailyQuestions.end())
    return Condition::daily;
  return std::nullopt;
}

GroupLabel label_group(double ecog_score) {
  if (!(ecog_score >= kEcogMin && ecog_score <= kEcogMax))
    throw std::invalid_argument("ecog_score out of range [1, 4]");
  return ecog_score >= kEcogCutoff ? GroupLabel::high : GroupLabel::low;
}

int samples_for_ms(double ms, int sample_rate) {
  // 1e-9 guards against 0.025 * 44100 landing just below 1102.5 vs above.
  return std::max(1, static_cast<int>(std::floor(ms * sample_rate / 1000.0 + 1e-9)));
}

namespace {

struct RowContext {
  std::size_t row;
  std::string field;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("manifest row " + std::to_string(row) + ", field '" + field + "': " + what);
  }
};

double parse_number(const std::string& text, const RowContext& ctx) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    ctx.fail("not a number: '" + text + "'");
  return v;
}

}  // namespace

std::vector<ResponseRecord> load_manifest(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  if (table.header.empty() || table.rows.empty()) throw DataError("no records in " + path.string());

  const std::size_t c_pid = table.column("participant_id");
  const std::size_t c_qid = table.column("question_id");
  const std::size_t c_cond = table.column("condition");
  const std::size_t c_audio = table.column("audio_path");
  const std::size_t c_ecog = table.column("ecog");
  const std::size_t c_age = table.column("age");
  const std::size_t c_sex = table.column("sex");
  const std::size_t c_edu = table.column("education");
  std::vector<std::pair<std::string, std::size_t>> np_cols;
  for (auto name : kNeuropsychTests)
    if (table.has_column(name)) np_cols.emplace_back(std::string(name), table.column(name));

  const auto base = path.parent_path();
  std::vector<ResponseRecord> records;
  records.reserve(table.rows.size());
  std::set<std::pair<std::string, std::string>> seen;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    RowContext ctx{r + 1, ""};
    if (row.size() != table.header.size()) {
      ctx.field = "*";
      ctx.fail("expected " + std::to_string(table.header.size()) + " fields, got " +
               std::to_string(row.size()));
    }
    ResponseRecord rec;
    ctx.field = "participant_id";
    rec.participant_id = row[c_pid];
    if (rec.participant_id.empty()) ctx.fail("empty");

    ctx.field = "question_id";
    rec.question_id = row[c_qid];
    const auto qcond = condition_of_question(rec.question_id);
    if (!qcond) ctx.fail("unknown task identifier '" + rec.question_id + "'");

    ctx.field = "condition";
    if (row[c_cond] == "cognitive") {
      rec.condition = Condition::cognitive;
    } else if (row[c_cond] == "daily") {
      rec.condition = Condition::daily;
    } else {
      ctx.fail("expected cognitive or daily, got '" + row[c_cond] + "'");
    }
    if (rec.condition != *qcond)
      ctx.fail("task '" + rec.question_id + "' belongs to condition " +
               std::string(to_string(*qcond)));

    ctx.field = "audio_path";
    if (row[c_audio].empty()) ctx.fail("empty");
    rec.audio_path = row[c_audio];
    if (rec.audio_path.is_relative()) rec.audio_path = base / rec.audio_path;

    ctx.field = "ecog";
    rec.ecog_score = parse_number(row[c_ecog], ctx);
    if (rec.ecog_score < kEcogMin || rec.ecog_score > kEcogMax) ctx.fail("ecog_score out of range");

    ctx.field = "age";
    rec.age = parse_number(row[c_age], ctx);
    if (rec.age <= 0) ctx.fail("age must be positive");

    ctx.field = "sex";
    if (row[c_sex] == "F") {
      rec.sex = Sex::female;
    } else if (row[c_sex] == "M") {
      rec.sex = Sex::male;
    } else {
      ctx.fail("expected F or M, got '" + row[c_sex] + "'");
    }

    ctx.field = "education";
    rec.education = parse_number(row[c_edu], ctx);
    if (rec.education < 0) ctx.fail("education must be >= 0");

    for (const auto& [name, col] : np_cols) {
      if (row[col].empty()) continue;
      ctx.field = name;
      rec.neuropsych[name] = parse_number(row[col], ctx);
    }

    if (!seen.emplace(rec.participant_id, rec.question_id).second) {
      ctx.field = "question_id";
      ctx.fail("duplicate response (" + rec.participant_id + ", " + rec.question_id + ")");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::filesystem::path& path, std::span<const ResponseRecord> records,
                   const std::filesystem::path& relative_to) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "participant_id,question_id,condition,audio_path,ecog,age,sex,education";
  for (auto name : kNeuropsychTests) out << ',' << name;
  out << '\n';
  for (const auto& r : records) {
    std::filesystem::path audio = r.audio_path;
    if (!relative_to.empty()) audio = audio.lexically_relative(relative_to);
    std::vector<std::string> fields = {r.participant_id,
                                       r.question_id,
                                       std::string(to_string(r.condition)),
                                       audio.generic_string(),
                                       csv::format_number(r.ecog_score),
                                       csv::format_number(r.age),
                                       r.sex == Sex::female ? "F" : "M",
                                       csv::format_number(r.education)};
    for (auto name : kNeuropsychTests) {
      auto it = r.neuropsych.find(std::string(name));
      fields.push_back(it == r.neuropsych.end() ? std::string() : csv::format_number(it->second));
    }
    out << csv::join(fields) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

AudioClip remove_silence(const AudioClip& clip, const VadConfig& config) {
  const auto& x = clip.samples;
  const std::size_t n = x.size();
  if (n == 0 || clip.sample_rate <= 0) throw DataError("no voiced content");

  const std::size_t frame = static_cast<std::size_t>(samples_for_ms(config.frame_ms, clip.sample_rate));
  const std::size_t hop = static_cast<std::size_t>(samples_for_ms(config.hop_ms, clip.sample_rate));
  const std::size_t n_frames = n >= frame ? (n - frame) / hop + 1 : 1;

  std::vector<double> level_db(n_frames);
  double max_db = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t b = f * hop;
    const std::size_t e = std::min(n, b + frame);
    double ss = 0.0;
    for (std::size_t i = b; i < e; ++i) ss += x[i] * x[i];
    const double rms = std::sqrt(ss / static_cast<double>(e - b));
    level_db[f] = rms > 0 ? 20.0 * std::log10(rms) : -std::numeric_limits<double>::infinity();
    max_db = std::max(max_db, level_db[f]);
  }
  if (!(max_db > config.floor_dbfs)) throw DataError("no voiced content");
  const double threshold = std::max(max_db - config.drop_db, config.floor_dbfs);

  // Runs of frames above the gate, as half-open sample ranges.
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  const std::size_t min_len =
      static_cast<std::size_t>(std::llround(config.min_segment_ms * clip.sample_rate / 1000.0));
  for (std::size_t f = 0; f < n_frames;) {
    if (!(level_db[f] > threshold)) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g + 1 < n_frames && level_db[g + 1] > threshold) ++g;
    const std::size_t b = f * hop;
    const std::size_t e = (g + 1 == n_frames) ? n : std::min(n, g * hop + frame);
    if (e - b >= min_len) segments.emplace_back(b, e);
    f = g + 1;
  }
  if (segments.empty()) throw DataError("no voiced content");

  const std::size_t pad =
      static_cast<std::size_t>(std::llround(config.pad_ms * clip.sample_rate / 1000.0));
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (auto [b, e] : segments) {
    b = b > pad ? b - pad : 0;
    e = std::min(n, e + pad);
    if (!merged.empty() && b <= merged.back().second)
      merged.back().second = std::max(merged.back().second, e);
    else
      merged.emplace_back(b, e);
  }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  for (auto [b, e] : merged) out.samples.insert(out.samples.end(), x.begin() + b, x.begin() + e);
  return out;
}

}  // namespace ecogvoice::corpus
