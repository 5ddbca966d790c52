#pragma once

// Deterministic synthetic multi-array meeting scenes with full ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include "gss/annotations.hpp"
#include "gss/cacgmm.hpp"
#include "gss/signal.hpp"

namespace gss {

struct ReverbConfig {
  bool enabled = false;
  double decay_seconds = 0.3;      // time for the tail envelope to fall by 60 dB
  double direct_to_tail_db = 0.0;  // direct-path energy over tail energy
};

enum class SourceKind { SpeechLikeModulatedNoise, WavFiles };

struct SceneConfig {
  std::uint64_t seed = 0;
  int speakers = 4;
  int arrays = 6;
  int channels_per_array = 4;
  double duration = 30.0;
  int sample_rate = 16000;
  double overlap_ratio = 0.22;
  ReverbConfig reverb;
  double noise_snr_db = 20.0;
  std::vector<double> array_clock_offset_ms;  // empty means all zero
  SourceKind source_kind = SourceKind::SpeechLikeModulatedNoise;
  std::vector<std::string> wav_files;         // one per speaker for WavFiles
};

void validate(const SceneConfig& cfg);

struct SceneGroundTruth {
  SceneConfig config;
  std::vector<std::string> speakers;
  std::vector<UtteranceAnnotation> utterances;  // true schedule
  std::vector<WaveformSegment> mixtures;        // per array
  /// clean_images[s][a]: speaker s as received by array a.
  std::vector<std::vector<WaveformSegment>> clean_images;
  /// Direct-path part of clean_images; filled only for reverberant scenes.
  std::vector<std::vector<WaveformSegment>> direct_images;
  std::vector<WaveformSegment> noise;           // per array
  ActivityPattern activity;
  MaskSet oracle_masks;                         // reference array, channel 0
  std::vector<AlignmentTrack> oracle_alignment;
};

/// STFT used for scene-level activity and oracle masks.
StftConfig scene_stft();

SceneGroundTruth generate_scene(const SceneConfig& cfg);

/// Ideal ratio masks |S_k|^2 / (sum_j |S_j|^2 + |N|^2) computed from
/// single-channel image and noise signals; the noise class is last.
MaskSet compute_oracle_masks(const std::vector<std::string>& speakers,
                             const std::vector<RealVector>& images, const RealVector& noise,
                             const StftConfig& cfg, int sample_rate);

/// Speech segments = maximal runs of frames whose clean-image energy at the
/// reference channel lies within `energy_floor_db` of the speaker's peak.
std::vector<AlignmentTrack> oracle_alignment(const SceneGroundTruth& gt,
                                             double energy_floor_db = 30.0);

/// Fraction of frames with at least two active speakers among frames with at
/// least one.
double overlap_fraction(const ActivityPattern& act);

/// Writes mixtures, images, noise, annotations, alignment, oracle masks and a
/// manifest with a content checksum.
void save_scene(const SceneGroundTruth& gt, const std::string& dir);
SceneGroundTruth load_scene(const std::string& dir);

/// FNV-1a 64-bit hash of a file's bytes.
std::uint64_t file_checksum(const std::string& path);

}  // namespace gss
