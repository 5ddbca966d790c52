#pragma once

// End-to-end enhancement of annotated utterances:
// context extension -> array stacking -> STFT -> WPE -> GSS -> mask-based
// MVDR with BAN -> iSTFT.

#include <optional>
#include <string>
#include <vector>

#include "gss/annotations.hpp"
#include "gss/beamform.hpp"
#include "gss/cacgmm.hpp"
#include "gss/dereverb.hpp"
#include "gss/metrics.hpp"
#include "gss/signal.hpp"

namespace gss {

struct PipelineConfig {
  StftConfig stft;
  std::optional<WpeConfig> wpe = WpeConfig{};  // nullopt skips dereverberation
  bool gss_enabled = true;  // off: no beamforming, the reference channel is passed through
  GssConfig gss;
  ContextConfig context;
  bool bf_context = false;  // use context frames for the beamformer statistics
  std::vector<int> arrays;  // selected array indices; empty selects all
  ReferencePolicy reference_policy = ReferencePolicy::MaxSnr;
  int reference_channel = 0;  // stacked index used by ReferencePolicy::Fixed
  Real bf_loading = 1e-6;
  std::string output_dir = "enhanced";
  bool export_masks = false;
};

void validate(const PipelineConfig& cfg);

/// Keys mirror the PipelineConfig field names; missing keys keep defaults.
PipelineConfig parse_pipeline_config(const std::string& text);
std::string format_pipeline_config(const PipelineConfig& cfg);

struct UtteranceResult {
  UtteranceAnnotation utterance;
  WaveformSegment enhanced;        // one channel covering the utterance
  Eigen::Index reference_channel = 0;  // index within the stacked channels
  int reference_array = 0;             // position in the selected array list
  int reference_array_channel = 0;
  Eigen::Index window_start = 0;   // first sample of the processed window
  Eigen::Index window_end = 0;
  MaskSet masks;
};

/// Enhances one utterance. `arrays` are whole recordings of the selected
/// arrays; `tracks`, when given, refine the activity first.
UtteranceResult enhance_utterance(const std::vector<WaveformSegment>& arrays,
                                  const std::vector<UtteranceAnnotation>& annotations,
                                  const UtteranceAnnotation& target, const PipelineConfig& cfg,
                                  const std::vector<AlignmentTrack>* tracks = nullptr);

/// Applies cfg.arrays to the full array list.
std::vector<WaveformSegment> select_arrays(const std::vector<WaveformSegment>& arrays,
                                           const PipelineConfig& cfg);

/// Evaluation record for an utterance result; `array_indices` maps positions
/// in the selected list back to scene array indices.
EnhancedUtterance to_enhanced(const UtteranceResult& r, const std::vector<int>& array_indices,
                              int hop, bool with_masks);

struct EnhanceSummary {
  int processed = 0;
  int failed = 0;
};

/// Enhances every annotated utterance and writes `<speaker>_<utterance>.wav`,
/// optional mask files and `enhance_manifest.json` into cfg.output_dir.
/// Per-utterance failures are reported on stderr and counted.
EnhanceSummary run_enhance(const PipelineConfig& cfg, const std::vector<WaveformSegment>& arrays,
                           const std::vector<UtteranceAnnotation>& annotations,
                           const std::optional<std::vector<AlignmentTrack>>& alignment);

}  // namespace gss
