#pragma once

#include <string>
#include <vector>

namespace gss {

struct HypothesisWord {
  std::string utterance_id;
  std::string speaker_id;
  std::string token;
  double start = 0;
  double end = 0;
  double confidence = 1;
};

void validate(const HypothesisWord& w);

/// Removes the lower-confidence word of every pair from different utterances
/// that share a token (ASCII case-folded) and overlap in time by at least
/// `overlap_threshold` times the shorter duration. Pairs are judged against
/// the input set in one pass. Equal confidences keep the earlier start, then
/// the smaller utterance id. Input order is preserved.
std::vector<HypothesisWord> deduplicate(const std::vector<HypothesisWord>& words,
                                        double overlap_threshold = 0.5);

/// CTM-style lines: `utterance_id speaker_id start duration token confidence`.
std::vector<HypothesisWord> parse_ctm(const std::string& text);
std::string format_ctm(const std::vector<HypothesisWord>& words);

}  // namespace gss
