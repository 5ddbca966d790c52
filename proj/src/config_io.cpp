#include "gss/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gss::io {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(what + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(key, context + " is missing this field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, context + " has a value of the wrong type");
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<UtteranceAnnotation> parse_annotations(const std::string& text) {
  const json doc = parse_json(text, "annotation file");
  if (!doc.is_array()) throw Error("annotation file: expected an array");
  std::vector<UtteranceAnnotation> out;
  for (const auto& item : doc) {
    UtteranceAnnotation u;
    u.utterance_id = get_field<std::string>(item, "utterance_id", "annotation");
    u.speaker_id = get_field<std::string>(item, "speaker_id", "annotation");
    u.start = get_field<double>(item, "start", "annotation");
    u.end = get_field<double>(item, "end", "annotation");
    validate(u);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<UtteranceAnnotation> read_annotations(const std::string& path) {
  return parse_annotations(read_text(path));
}

std::string format_annotations(const std::vector<UtteranceAnnotation>& anns) {
  json doc = json::array();
  for (const auto& u : anns)
    doc.push_back({{"utterance_id", u.utterance_id},
                   {"speaker_id", u.speaker_id},
                   {"start", u.start},
                   {"end", u.end}});
  return doc.dump(2) + "\n";
}

void write_annotations(const std::string& path, const std::vector<UtteranceAnnotation>& anns) {
  write_text(path, format_annotations(anns));
}

std::vector<AlignmentTrack> parse_alignment(const std::string& text) {
  const json doc = parse_json(text, "alignment file");
  if (!doc.is_array()) throw Error("alignment file: expected an array");
  std::vector<AlignmentTrack> out;
  for (const auto& item : doc) {
    AlignmentTrack track;
    track.speaker_id = get_field<std::string>(item, "speaker_id", "alignment");
    const auto segments =
        get_field<std::vector<std::vector<double>>>(item, "speech_segments", "alignment");
    for (const auto& seg : segments) {
      if (seg.size() != 2) throw ConfigError("speech_segments", "expected [start, end] pairs");
      track.speech_segments.emplace_back(seg[0], seg[1]);
    }
    validate(track);
    out.push_back(std::move(track));
  }
  return out;
}

std::vector<AlignmentTrack> read_alignment(const std::string& path) {
  return parse_alignment(read_text(path));
}

std::string format_alignment(const std::vector<AlignmentTrack>& tracks) {
  json doc = json::array();
  for (const auto& track : tracks) {
    json segments = json::array();
    for (const auto& [s, e] : track.speech_segments) segments.push_back({s, e});
    doc.push_back({{"speaker_id", track.speaker_id}, {"speech_segments", segments}});
  }
  return doc.dump(2) + "\n";
}

void write_alignment(const std::string& path, const std::vector<AlignmentTrack>& tracks) {
  write_text(path, format_alignment(tracks));
}

SceneConfig parse_scene_config(const std::string& text) {
  const json doc = parse_json(text, "scene config");
  if (!doc.is_object()) throw Error("scene config: expected an object");
  static const std::set<std::string> known = {
      "seed",         "speakers",          "arrays",
      "channels_per_array", "duration",    "sample_rate",
      "overlap_ratio", "reverb",           "noise_snr_db",
      "array_clock_offset_ms", "source_kind"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw ConfigError(key, "unknown scene config field");

  SceneConfig cfg;
  const std::string ctx = "scene config";
  if (doc.contains("seed")) cfg.seed = get_field<std::uint64_t>(doc, "seed", ctx);
  if (doc.contains("speakers")) cfg.speakers = get_field<int>(doc, "speakers", ctx);
  if (doc.contains("arrays")) cfg.arrays = get_field<int>(doc, "arrays", ctx);
  if (doc.contains("channels_per_array"))
    cfg.channels_per_array = get_field<int>(doc, "channels_per_array", ctx);
  if (doc.contains("duration")) cfg.duration = get_field<double>(doc, "duration", ctx);
  if (doc.contains("sample_rate")) cfg.sample_rate = get_field<int>(doc, "sample_rate", ctx);
  if (doc.contains("overlap_ratio"))
    cfg.overlap_ratio = get_field<double>(doc, "overlap_ratio", ctx);
  if (doc.contains("noise_snr_db")) cfg.noise_snr_db = get_field<double>(doc, "noise_snr_db", ctx);
  if (doc.contains("array_clock_offset_ms"))
    cfg.array_clock_offset_ms =
        get_field<std::vector<double>>(doc, "array_clock_offset_ms", ctx);

  if (doc.contains("reverb")) {
    const json& r = doc.at("reverb");
    if (r.is_string() && r.get<std::string>() == "none") {
      cfg.reverb.enabled = false;
    } else if (r.is_object() && r.contains("tail")) {
      const json& tail = r.at("tail");
      cfg.reverb.enabled = true;
      cfg.reverb.decay_seconds = get_field<double>(tail, "decay_seconds", "reverb.tail");
      cfg.reverb.direct_to_tail_db = get_field<double>(tail, "direct_to_tail_db", "reverb.tail");
    } else {
      throw ConfigError("reverb", "expected \"none\" or {\"tail\": {...}}");
    }
  }
  if (doc.contains("source_kind")) {
    const json& s = doc.at("source_kind");
    if (s.is_string() && s.get<std::string>() == "speech_like_modulated_noise") {
      cfg.source_kind = SourceKind::SpeechLikeModulatedNoise;
    } else if (s.is_object() && s.contains("wav_files")) {
      cfg.source_kind = SourceKind::WavFiles;
      cfg.wav_files = get_field<std::vector<std::string>>(s, "wav_files", "source_kind");
    } else {
      throw ConfigError("source_kind",
                        "expected \"speech_like_modulated_noise\" or {\"wav_files\": [...]}");
    }
  }
  validate(cfg);
  return cfg;
}

SceneConfig read_scene_config(const std::string& path) {
  return parse_scene_config(read_text(path));
}

std::string format_scene_config(const SceneConfig& cfg) {
  json doc = {{"seed", cfg.seed},
              {"speakers", cfg.speakers},
              {"arrays", cfg.arrays},
              {"channels_per_array", cfg.channels_per_array},
              {"duration", cfg.duration},
              {"sample_rate", cfg.sample_rate},
              {"overlap_ratio", cfg.overlap_ratio},
              {"noise_snr_db", cfg.noise_snr_db},
              {"array_clock_offset_ms", cfg.array_clock_offset_ms}};
  if (cfg.reverb.enabled)
    doc["reverb"] = {{"tail",
                      {{"decay_seconds", cfg.reverb.decay_seconds},
                       {"direct_to_tail_db", cfg.reverb.direct_to_tail_db}}}};
  else
    doc["reverb"] = "none";
  if (cfg.source_kind == SourceKind::WavFiles)
    doc["source_kind"] = {{"wav_files", cfg.wav_files}};
  else
    doc["source_kind"] = "speech_like_modulated_noise";
  return doc.dump(2) + "\n";
}

}  // namespace gss::io
