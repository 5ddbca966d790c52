#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gss/types.hpp"

namespace gss {

struct UtteranceAnnotation {
  std::string utterance_id;
  std::string speaker_id;
  double start = 0;  // seconds
  double end = 0;
};

/// Per-speaker, per-frame activity. Frame t spans
/// [frame_offset + t * frame_shift, frame_offset + (t + 1) * frame_shift).
struct ActivityPattern {
  std::vector<std::string> speakers;
  BoolMatrix active;  // speakers x frames
  double frame_shift = 0.016;
  double frame_offset = 0;

  Eigen::Index frames() const { return active.cols(); }
  /// Row index of `speaker`, or -1.
  Eigen::Index index_of(const std::string& speaker) const;
};

struct AlignmentTrack {
  std::string speaker_id;
  std::vector<std::pair<double, double>> speech_segments;
};

struct ContextConfig {
  double left = 15.0;
  double right = 15.0;
};

void validate(const UtteranceAnnotation& u);
void validate(const AlignmentTrack& track);

/// Utterance interval widened by the context and clamped to the recording.
std::pair<double, double> extend_context(const UtteranceAnnotation& u, const ContextConfig& ctx,
                                         double recording_len);

/// Frame-level activity over `window`: speaker s is active at frame t iff one
/// of its annotated intervals overlaps the frame span. Rows follow the order
/// of first appearance in `anns`; speakers whose intervals miss the window
/// still get a (false) row. `frames` < 0 derives the count from the window.
ActivityPattern build_activity(const std::vector<UtteranceAnnotation>& anns,
                               std::pair<double, double> window, double frame_shift,
                               double frame_offset, Eigen::Index frames = -1);

/// Deactivates frames that do not overlap any speech segment of the
/// speaker's track. Speakers without a track are left untouched.
ActivityPattern refine_with_alignment(const ActivityPattern& act,
                                      const std::vector<AlignmentTrack>& tracks);

/// Drops speakers that are never active, keeping their relative order.
ActivityPattern drop_silent_speakers(const ActivityPattern& act);

/// Frames whose span overlaps [start, end).
std::vector<bool> frames_overlapping(const ActivityPattern& act, double start, double end);

}  // namespace gss
