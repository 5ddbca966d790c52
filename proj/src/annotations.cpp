#include "gss/annotations.hpp"

#include <algorithm>
#include <cmath>

namespace gss {

namespace {

bool overlaps(double a0, double a1, double b0, double b1) { return a0 < b1 && b0 < a1; }

}  // namespace

Eigen::Index ActivityPattern::index_of(const std::string& speaker) const {
  const auto it = std::find(speakers.begin(), speakers.end(), speaker);
  return it == speakers.end() ? -1 : static_cast<Eigen::Index>(it - speakers.begin());
}

void validate(const UtteranceAnnotation& u) {
  if (!(u.start >= 0) || !(u.start < u.end))
    throw Error("utterance " + u.utterance_id + ": require 0 <= start < end");
}

void validate(const AlignmentTrack& track) {
  double previous_end = -1;
  for (const auto& [s, e] : track.speech_segments) {
    if (!(s < e)) throw Error("alignment for " + track.speaker_id + ": segment with start >= end");
    if (s < previous_end)
      throw Error("alignment for " + track.speaker_id + ": segments unsorted or overlapping");
    previous_end = e;
  }
}

std::pair<double, double> extend_context(const UtteranceAnnotation& u, const ContextConfig& ctx,
                                         double recording_len) {
  validate(u);
  if (ctx.left < 0 || ctx.right < 0) throw ConfigError("context", "must be non-negative");
  if (recording_len < u.end)
    throw Error("utterance " + u.utterance_id + " ends after the recording");
  return {std::max(0.0, u.start - ctx.left), std::min(recording_len, u.end + ctx.right)};
}

ActivityPattern build_activity(const std::vector<UtteranceAnnotation>& anns,
                               std::pair<double, double> window, double frame_shift,
                               double frame_offset, Eigen::Index frames) {
  if (!(frame_shift > 0)) throw ConfigError("frame_shift", "must be positive");
  if (!(window.second > window.first)) throw Error("build_activity: empty window");
  if (frames < 0)
    frames = static_cast<Eigen::Index>(
        std::ceil((window.second - window.first) / frame_shift - 1e-9));

  ActivityPattern act;
  act.frame_shift = frame_shift;
  act.frame_offset = frame_offset;
  for (const auto& u : anns)
    if (act.index_of(u.speaker_id) < 0) act.speakers.push_back(u.speaker_id);
  if (act.speakers.empty()) act.speakers.push_back("");

  act.active = BoolMatrix::Constant(static_cast<Eigen::Index>(act.speakers.size()), frames, false);
  for (const auto& u : anns) {
    validate(u);
    const double lo = std::max(u.start, window.first);
    const double hi = std::min(u.end, window.second);
    if (!(lo < hi)) continue;
    const Eigen::Index row = act.index_of(u.speaker_id);
    // Candidate frames by arithmetic, then confirmed with the exact overlap test.
    const auto first = std::max<Eigen::Index>(
        0, static_cast<Eigen::Index>(std::floor((lo - frame_offset) / frame_shift)) - 1);
    const auto last = std::min<Eigen::Index>(
        frames - 1, static_cast<Eigen::Index>(std::ceil((hi - frame_offset) / frame_shift)) + 1);
    for (Eigen::Index t = first; t <= last; ++t) {
      const double f0 = frame_offset + t * frame_shift;
      if (overlaps(f0, f0 + frame_shift, lo, hi)) act.active(row, t) = true;
    }
  }
  return act;
}

ActivityPattern refine_with_alignment(const ActivityPattern& act,
                                      const std::vector<AlignmentTrack>& tracks) {
  ActivityPattern out = act;
  for (const auto& track : tracks) {
    validate(track);
    const Eigen::Index row = act.index_of(track.speaker_id);
    if (row < 0) throw Error("alignment refers to unknown speaker " + track.speaker_id);
    for (Eigen::Index t = 0; t < act.frames(); ++t) {
      if (!out.active(row, t)) continue;
      const double f0 = act.frame_offset + t * act.frame_shift;
      const double f1 = f0 + act.frame_shift;
      const bool speech = std::any_of(
          track.speech_segments.begin(), track.speech_segments.end(),
          [&](const auto& seg) { return overlaps(f0, f1, seg.first, seg.second); });
      if (!speech) out.active(row, t) = false;
    }
  }
  return out;
}

ActivityPattern drop_silent_speakers(const ActivityPattern& act) {
  ActivityPattern out;
  out.frame_shift = act.frame_shift;
  out.frame_offset = act.frame_offset;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index s = 0; s < act.active.rows(); ++s)
    if (act.active.row(s).any()) keep.push_back(s);
  out.active.resize(static_cast<Eigen::Index>(keep.size()), act.frames());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.speakers.push_back(act.speakers[static_cast<std::size_t>(keep[i])]);
    out.active.row(static_cast<Eigen::Index>(i)) = act.active.row(keep[i]);
  }
  return out;
}

std::vector<bool> frames_overlapping(const ActivityPattern& act, double start, double end) {
  std::vector<bool> out(static_cast<std::size_t>(act.frames()), false);
  for (Eigen::Index t = 0; t < act.frames(); ++t) {
    const double f0 = act.frame_offset + t * act.frame_shift;
    out[static_cast<std::size_t>(t)] = overlaps(f0, f0 + act.frame_shift, start, end);
  }
  return out;
}

}  // namespace gss
