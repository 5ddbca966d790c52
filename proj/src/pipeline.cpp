#include "gss/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "gss/config_io.hpp"
#include "gss/wav.hpp"
#include "json.hpp"

namespace gss {

using nlohmann::json;

void validate(const PipelineConfig& cfg) {
  validate(cfg.stft);
  if (cfg.wpe) validate(*cfg.wpe);
  if (cfg.gss.iterations < 0) throw ConfigError("gss.iterations", "must be >= 0");
  if (cfg.context.left < 0 || cfg.context.right < 0)
    throw ConfigError("context", "must be non-negative");
  if (cfg.bf_loading < 0) throw ConfigError("bf_loading", "must be non-negative");
  if (cfg.reference_channel < 0) throw ConfigError("reference_channel", "must be >= 0");
  for (int a : cfg.arrays)
    if (a < 0) throw ConfigError("arrays", "indices must be non-negative");
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const T& fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "value of the wrong type");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ConfigError(path + key, "unknown field");
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("pipeline config: ") + e.what());
  }
  if (!doc.is_object()) throw Error("pipeline config: expected an object");
  reject_unknown(doc, {"stft", "wpe", "gss", "context", "bf_context", "arrays", "reference_policy",
                       "reference_channel", "bf_loading", "output_dir", "export_masks"},
                 "");
  PipelineConfig cfg;
  if (doc.contains("stft")) {
    const json& s = doc.at("stft");
    reject_unknown(s, {"fft_size", "shift", "window", "pad_mode"}, "stft.");
    cfg.stft.fft_size = field(s, "fft_size", cfg.stft.fft_size, "stft.");
    cfg.stft.shift = field(s, "shift", cfg.stft.shift, "stft.");
    const auto window = field<std::string>(s, "window", "sqrt-hann", "stft.");
    if (window == "sqrt-hann") cfg.stft.window = WindowType::SqrtHann;
    else if (window == "hann") cfg.stft.window = WindowType::Hann;
    else throw ConfigError("stft.window", "expected sqrt-hann or hann");
    const auto pad = field<std::string>(s, "pad_mode", "zero", "stft.");
    if (pad == "zero") cfg.stft.pad_mode = PadMode::Zero;
    else if (pad == "reflect") cfg.stft.pad_mode = PadMode::Reflect;
    else throw ConfigError("stft.pad_mode", "expected zero or reflect");
  }
  if (doc.contains("wpe")) {
    const json& w = doc.at("wpe");
    if (w.is_null() || (w.is_boolean() && !w.get<bool>())) {
      cfg.wpe.reset();
    } else if (w.is_object()) {
      reject_unknown(w, {"taps", "delay", "iterations", "psd_floor", "regularization"}, "wpe.");
      WpeConfig wc;
      wc.taps = field(w, "taps", wc.taps, "wpe.");
      wc.delay = field(w, "delay", wc.delay, "wpe.");
      wc.iterations = field(w, "iterations", wc.iterations, "wpe.");
      wc.psd_floor = field(w, "psd_floor", wc.psd_floor, "wpe.");
      wc.regularization = field(w, "regularization", wc.regularization, "wpe.");
      cfg.wpe = wc;
    } else if (!w.is_boolean()) {
      throw ConfigError("wpe", "expected an object, false or null");
    }
  }
  if (doc.contains("gss")) {
    const json& g = doc.at("gss");
    reject_unknown(g, {"enabled", "iterations", "inverse_regularization", "include_noise_class"},
                   "gss.");
    cfg.gss_enabled = field(g, "enabled", cfg.gss_enabled, "gss.");
    cfg.gss.iterations = field(g, "iterations", cfg.gss.iterations, "gss.");
    cfg.gss.inverse_regularization =
        field(g, "inverse_regularization", cfg.gss.inverse_regularization, "gss.");
    cfg.gss.include_noise_class = field(g, "include_noise_class", cfg.gss.include_noise_class, "gss.");
  }
  if (doc.contains("context")) {
    const json& c = doc.at("context");
    reject_unknown(c, {"left", "right"}, "context.");
    cfg.context.left = field(c, "left", cfg.context.left, "context.");
    cfg.context.right = field(c, "right", cfg.context.right, "context.");
  }
  cfg.bf_context = field(doc, "bf_context", cfg.bf_context, "");
  cfg.arrays = field(doc, "arrays", cfg.arrays, "");
  const auto policy = field<std::string>(doc, "reference_policy", "max_snr", "");
  if (policy == "max_snr") cfg.reference_policy = ReferencePolicy::MaxSnr;
  else if (policy == "fixed") cfg.reference_policy = ReferencePolicy::Fixed;
  else throw ConfigError("reference_policy", "expected max_snr or fixed");
  cfg.reference_channel = field(doc, "reference_channel", cfg.reference_channel, "");
  cfg.bf_loading = field(doc, "bf_loading", cfg.bf_loading, "");
  cfg.output_dir = field(doc, "output_dir", cfg.output_dir, "");
  cfg.export_masks = field(doc, "export_masks", cfg.export_masks, "");
  validate(cfg);
  return cfg;
}

std::string format_pipeline_config(const PipelineConfig& cfg) {
  json doc;
  doc["stft"] = {{"fft_size", cfg.stft.fft_size},
                 {"shift", cfg.stft.shift},
                 {"window", cfg.stft.window == WindowType::SqrtHann ? "sqrt-hann" : "hann"},
                 {"pad_mode", cfg.stft.pad_mode == PadMode::Zero ? "zero" : "reflect"}};
  if (cfg.wpe)
    doc["wpe"] = {{"taps", cfg.wpe->taps},
                  {"delay", cfg.wpe->delay},
                  {"iterations", cfg.wpe->iterations},
                  {"psd_floor", cfg.wpe->psd_floor},
                  {"regularization", cfg.wpe->regularization}};
  else
    doc["wpe"] = nullptr;
  doc["gss"] = {{"enabled", cfg.gss_enabled},
                {"iterations", cfg.gss.iterations},
                {"inverse_regularization", cfg.gss.inverse_regularization},
                {"include_noise_class", cfg.gss.include_noise_class}};
  doc["context"] = {{"left", cfg.context.left}, {"right", cfg.context.right}};
  doc["bf_context"] = cfg.bf_context;
  doc["arrays"] = cfg.arrays;
  doc["reference_policy"] = cfg.reference_policy == ReferencePolicy::MaxSnr ? "max_snr" : "fixed";
  doc["reference_channel"] = cfg.reference_channel;
  doc["bf_loading"] = cfg.bf_loading;
  doc["output_dir"] = cfg.output_dir;
  doc["export_masks"] = cfg.export_masks;
  return doc.dump(2) + "\n";
}

std::vector<WaveformSegment> select_arrays(const std::vector<WaveformSegment>& arrays,
                                           const PipelineConfig& cfg) {
  if (cfg.arrays.empty()) return arrays;
  std::vector<WaveformSegment> out;
  for (int a : cfg.arrays) {
    if (a < 0 || a >= static_cast<int>(arrays.size()))
      throw ConfigError("arrays", "index " + std::to_string(a) + " out of range");
    out.push_back(arrays[static_cast<std::size_t>(a)]);
  }
  return out;
}

UtteranceResult enhance_utterance(const std::vector<WaveformSegment>& arrays,
                                  const std::vector<UtteranceAnnotation>& annotations,
                                  const UtteranceAnnotation& target, const PipelineConfig& cfg,
                                  const std::vector<AlignmentTrack>* tracks) {
  if (arrays.empty()) throw Error("enhance: no arrays selected");
  const int fs = arrays.front().sample_rate;
  const int hop = cfg.stft.shift;
  Eigen::Index length = arrays.front().length();
  for (const auto& a : arrays) length = std::min(length, a.length());
  const double recording_len = static_cast<double>(length) / fs;

  const auto [ext_start, ext_end] = extend_context(target, cfg.context, recording_len);
  // Window starts on a hop boundary so its frames line up with recording-level frames.
  const Eigen::Index w0 = static_cast<Eigen::Index>(std::floor(ext_start * fs / hop)) * hop;
  const Eigen::Index w1 = std::min<Eigen::Index>(length, static_cast<Eigen::Index>(std::ceil(ext_end * fs)));
  if (w1 <= w0) throw Error("enhance: empty processing window for " + target.utterance_id);

  std::vector<WaveformSegment> pieces;
  for (const auto& a : arrays) {
    WaveformSegment piece;
    piece.sample_rate = fs;
    piece.start_offset = static_cast<double>(w0) / fs;
    piece.samples = a.samples.middleCols(w0, w1 - w0);
    pieces.push_back(std::move(piece));
  }
  const WaveformSegment stacked = stack_arrays(pieces, StackPolicy::TruncateToMin);

  MultiChannelSpectrogram spec = stft(stacked, cfg.stft);
  if (cfg.wpe) spec = wpe(spec, *cfg.wpe);

  UtteranceResult result;
  result.utterance = target;
  result.window_start = w0;
  result.window_end = w1;

  const auto [u0, u1] = utterance_samples(target, fs);
  const Eigen::Index crop_begin = u0 - w0;
  const Eigen::Index crop_len = std::min<Eigen::Index>(u1, w1) - u0;

  Eigen::Index ref = cfg.reference_policy == ReferencePolicy::Fixed ? cfg.reference_channel : 0;
  MultiChannelSpectrogram output;
  if (cfg.gss_enabled) {
    ActivityPattern act = build_activity(
        annotations, {static_cast<double>(w0) / fs, static_cast<double>(w1) / fs},
        static_cast<double>(hop) / fs,
        static_cast<double>(w0) / fs + frame_offset_seconds(cfg.stft, fs), spec.frames());
    if (tracks) act = refine_with_alignment(act, *tracks);
    const Eigen::Index target_row = act.index_of(target.speaker_id);
    if (target_row < 0 || !act.active.row(target_row).any())
      throw Error("enhance: speaker " + target.speaker_id + " has no active frames in " +
                  target.utterance_id);
    act = drop_silent_speakers(act);

    result.masks = run_gss(spec, act, cfg.gss);
    const TargetMasks tm = extract_masks(result.masks, target.speaker_id);
    std::vector<bool> selection;
    if (!cfg.bf_context) selection = frames_overlapping(act, target.start, target.end);
    const CovariancePair cov = estimate_covariances(spec, tm.target, tm.distortion, selection);
    if (cfg.reference_policy == ReferencePolicy::MaxSnr) ref = select_reference_channel(cov);
    if (ref >= spec.channels()) throw ConfigError("reference_channel", "exceeds the channel count");
    BeamformerWeights w = mvdr_souden(cov, ref, cfg.bf_loading);
    w = apply_ban(w, cov.distortion_psd);
    output = apply_beamformer(w, spec);
  } else {
    if (ref >= spec.channels()) throw ConfigError("reference_channel", "exceeds the channel count");
    output = spec.select_channels({ref});
  }

  const WaveformSegment wave = istft(output, w1 - w0);
  result.enhanced.sample_rate = fs;
  result.enhanced.start_offset = static_cast<double>(u0) / fs;
  result.enhanced.samples = wave.samples.middleCols(crop_begin, crop_len);

  result.reference_channel = ref;
  Eigen::Index remaining = ref;
  for (std::size_t a = 0; a < arrays.size(); ++a) {
    if (remaining < arrays[a].channels()) {
      result.reference_array = static_cast<int>(a);
      result.reference_array_channel = static_cast<int>(remaining);
      break;
    }
    remaining -= arrays[a].channels();
  }
  return result;
}

EnhancedUtterance to_enhanced(const UtteranceResult& r, const std::vector<int>& array_indices,
                              int hop, bool with_masks) {
  EnhancedUtterance e;
  e.utterance_id = r.utterance.utterance_id;
  e.speaker_id = r.utterance.speaker_id;
  e.waveform = r.enhanced.samples.row(0).transpose();
  e.reference_array = array_indices.empty()
                          ? r.reference_array
                          : array_indices[static_cast<std::size_t>(r.reference_array)];
  e.reference_channel = r.reference_array_channel;
  if (with_masks && !r.masks.classes.empty()) {
    e.masks = r.masks;
    e.mask_frame_offset = r.window_start / hop;
  }
  return e;
}

EnhanceSummary run_enhance(const PipelineConfig& cfg, const std::vector<WaveformSegment>& arrays,
                           const std::vector<UtteranceAnnotation>& annotations,
                           const std::optional<std::vector<AlignmentTrack>>& alignment) {
  namespace fs = std::filesystem;
  validate(cfg);
  const std::vector<WaveformSegment> selected = select_arrays(arrays, cfg);
  std::vector<int> indices = cfg.arrays;
  if (indices.empty())
    for (std::size_t a = 0; a < arrays.size(); ++a) indices.push_back(static_cast<int>(a));
  fs::create_directories(cfg.output_dir);

  EnhanceSummary summary;
  json entries = json::array();
  for (const auto& u : annotations) {
    try {
      const UtteranceResult r =
          enhance_utterance(selected, annotations, u, cfg, alignment ? &*alignment : nullptr);
      const std::string stem = u.speaker_id + "_" + u.utterance_id;
      wav::write((fs::path(cfg.output_dir) / (stem + ".wav")).string(), r.enhanced);
      json entry = {{"utterance_id", u.utterance_id},
                    {"speaker_id", u.speaker_id},
                    {"file", stem + ".wav"},
                    {"reference_array", indices[static_cast<std::size_t>(r.reference_array)]},
                    {"reference_channel", r.reference_array_channel},
                    {"window_start_sample", r.window_start},
                    {"window_end_sample", r.window_end},
                    {"mask_frame_offset", r.window_start / cfg.stft.shift}};
      if (cfg.export_masks && !r.masks.classes.empty()) {
        write_masks((fs::path(cfg.output_dir) / (stem + ".gssmask")).string(), r.masks);
        entry["masks"] = stem + ".gssmask";
      }
      entries.push_back(entry);
      ++summary.processed;
      std::cerr << "enhanced " << stem << "\n";
    } catch (const std::exception& e) {
      ++summary.failed;
      std::cerr << "failed " << u.utterance_id << ": " << e.what() << "\n";
    }
  }
  json manifest = {{"config", json::parse(format_pipeline_config(cfg))},
                   {"arrays", indices},
                   {"utterances", entries}};
  io::write_text((fs::path(cfg.output_dir) / "enhance_manifest.json").string(),
                 manifest.dump(2) + "\n");
  return summary;
}

}  // namespace gss
