#include "ecogvoice/config.hpp"

#include <fstream>
#include <string>

#include "ecogvoice/error.hpp"

namespace ecogvoice::config {

namespace {

using nlohmann::json;

// Walks a struct's fields as (key, member) pairs.
template <class V> void fields(corpus::VadConfig& c, V&& v) {
  v("drop_db", c.drop_db);
  v("min_segment_ms", c.min_segment_ms);
  v("pad_ms", c.pad_ms);
  v("frame_ms", c.frame_ms);
  v("hop_ms", c.hop_ms);
  v("floor_dbfs", c.floor_dbfs);
}
template <class V> void fields(dsp::MfccConfig& c, V&& v) {
  v("n_coeffs", c.n_coeffs);
  v("n_mels", c.n_mels);
  v("fft_size", c.fft_size);
  v("preemphasis", c.preemphasis);
  v("frame_ms", c.frame_ms);
  v("hop_ms", c.hop_ms);
}
template <class V> void fields(dsp::SgConfig& c, V&& v) {
  v("window", c.window);
  v("polyorder", c.polyorder);
}
template <class V> void fields(dsp::PitchConfig& c, V&& v) {
  v("fmin", c.fmin);
  v("fmax", c.fmax);
  v("voicing_threshold", c.voicing_threshold);
  v("frame_ms", c.frame_ms);
  v("hop_ms", c.hop_ms);
  v("silence_drop_db", c.silence_drop_db);
  v("floor_dbfs", c.floor_dbfs);
  v("octave_ratio", c.octave_ratio);
  v("jump_window", c.jump_window);
  v("jump_ratio", c.jump_ratio);
}
template <class V> void fields(dsp::FormantConfig& c, V&& v) {
  v("lpc_order", c.lpc_order);
  v("analysis_rate", c.analysis_rate);
  v("preemphasis", c.preemphasis);
  v("max_bandwidth", c.max_bandwidth);
  v("f1_lo", c.f1_lo);
  v("f1_hi", c.f1_hi);
  v("f2_lo", c.f2_lo);
  v("f2_hi", c.f2_hi);
}
template <class V> void fields(vq::MarkConfig& c, V&& v) {
  v("window_lo", c.window_lo);
  v("window_hi", c.window_hi);
}
template <class V> void fields(learn::BorutaConfig& c, V&& v) {
  v("max_iter", c.max_iter);
  v("alpha", c.alpha);
  v("max_depth", c.max_depth);
  v("max_bins", c.max_bins);
}
template <class V> void fields(learn::TpeConfig& c, V&& v) {
  v("n_startup", c.n_startup);
  v("gamma", c.gamma);
  v("n_candidates", c.n_candidates);
  v("prior_weight", c.prior_weight);
}

template <class T> json dump(T c) {
  json j = json::object();
  fields(c, [&](const char* k, auto& m) { j[k] = m; });
  return j;
}

template <class T> void load_into(const json& j, T& c, const std::string& path) {
  if (!j.is_object()) throw DataError("config: '" + path + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    fields(c, [&](const char* k, auto& m) {
      if (it.key() != k) return;
      found = true;
      using M = std::decay_t<decltype(m)>;
      const auto& val = it.value();
      if constexpr (std::is_integral_v<M>) {
        if (!val.is_number_integer()) throw DataError("config: '" + path + "." + k + "' must be an integer");
      } else {
        if (!val.is_number()) throw DataError("config: '" + path + "." + k + "' must be a number");
      }
      m = val.get<M>();
    });
    if (!found) throw DataError("config: unknown key '" + path + "." + it.key() + "'");
  }
}

std::string metric_name(learn::InnerMetric m) { return m == learn::InnerMetric::accuracy ? "accuracy" : "f1"; }

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["extract"] = {{"vad", dump(c.extract.vad)},       {"mfcc", dump(c.extract.mfcc)},
                  {"sg", dump(c.extract.sg)},         {"pitch", dump(c.extract.pitch)},
                  {"formant", dump(c.extract.formant)}, {"marks", dump(c.extract.marks)}};
  j["evaluate"] = {{"budget", c.budget}, {"metric", metric_name(c.metric)}, {"boruta", dump(c.boruta)},
                   {"tpe", dump(c.tpe)}};
  j["explain"] = {{"n_permutations", c.explain.shapley.n_permutations},
                  {"background_rows", c.explain.background_rows}};
  j["stats"] = {{"unit", std::string(stats::to_string(c.stats_unit))}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw DataError("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    const auto& sec = it.value();
    if (!sec.is_object()) throw DataError("config: '" + key + "' must be an object");
    if (key == "extract") {
      for (auto s = sec.begin(); s != sec.end(); ++s) {
        const std::string path = "extract." + s.key();
        if (s.key() == "vad") load_into(s.value(), c.extract.vad, path);
        else if (s.key() == "mfcc") load_into(s.value(), c.extract.mfcc, path);
        else if (s.key() == "sg") load_into(s.value(), c.extract.sg, path);
        else if (s.key() == "pitch") load_into(s.value(), c.extract.pitch, path);
        else if (s.key() == "formant") load_into(s.value(), c.extract.formant, path);
        else if (s.key() == "marks") load_into(s.value(), c.extract.marks, path);
        else throw DataError("config: unknown key '" + path + "'");
      }
    } else if (key == "evaluate") {
      for (auto s = sec.begin(); s != sec.end(); ++s) {
        const std::string path = "evaluate." + s.key();
        if (s.key() == "budget") {
          if (!s.value().is_number_integer() || s.value().get<int>() < 1)
            throw DataError("config: '" + path + "' must be a positive integer");
          c.budget = s.value().get<int>();
        } else if (s.key() == "metric") {
          const auto m = s.value().is_string() ? s.value().get<std::string>() : std::string();
          if (m == "accuracy") c.metric = learn::InnerMetric::accuracy;
          else if (m == "f1") c.metric = learn::InnerMetric::f1;
          else throw DataError("config: '" + path + "' must be \"accuracy\" or \"f1\"");
        } else if (s.key() == "boruta") {
          load_into(s.value(), c.boruta, path);
        } else if (s.key() == "tpe") {
          load_into(s.value(), c.tpe, path);
        } else {
          throw DataError("config: unknown key '" + path + "'");
        }
      }
    } else if (key == "explain") {
      for (auto s = sec.begin(); s != sec.end(); ++s) {
        const std::string path = "explain." + s.key();
        if (!s.value().is_number_integer()) throw DataError("config: '" + path + "' must be an integer");
        if (s.key() == "n_permutations") c.explain.shapley.n_permutations = s.value().get<int>();
        else if (s.key() == "background_rows") c.explain.background_rows = s.value().get<int>();
        else throw DataError("config: unknown key '" + path + "'");
      }
      if (c.explain.shapley.n_permutations < 50) throw DataError("config: 'explain.n_permutations' must be at least 50");
      if (c.explain.background_rows < 1) throw DataError("config: 'explain.background_rows' must be positive");
    } else if (key == "stats") {
      for (auto s = sec.begin(); s != sec.end(); ++s) {
        if (s.key() != "unit") throw DataError("config: unknown key 'stats." + s.key() + "'");
        try {
          c.stats_unit = stats::parse_unit(s.value().is_string() ? s.value().get<std::string>() : std::string());
        } catch (const std::invalid_argument& e) {
          throw DataError(std::string("config: 'stats.unit': ") + e.what());
        }
      }
    } else {
      throw DataError("config: unknown key '" + key + "'");
    }
  }
  if (c.boruta.max_iter < 20) throw DataError("config: 'evaluate.boruta.max_iter' must be at least 20");
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

learn::NestedCvConfig cv_config(const RunConfig& c, std::uint64_t seed, int jobs) {
  learn::NestedCvConfig cv;
  cv.budget = c.budget;
  cv.seed = seed;
  cv.jobs = jobs;
  cv.metric = c.metric;
  cv.boruta = c.boruta;
  cv.tpe = c.tpe;
  return cv;
}

}  // namespace ecogvoice::config
