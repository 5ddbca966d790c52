#include "gss/hypothesis.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "gss/types.hpp"

namespace gss {

namespace {

std::string fold(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// True when `a` survives against `b`.
bool wins(const HypothesisWord& a, const HypothesisWord& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.start != b.start) return a.start < b.start;
  return a.utterance_id < b.utterance_id;
}

}  // namespace

void validate(const HypothesisWord& w) {
  if (!(w.start < w.end)) throw Error("hypothesis word '" + w.token + "': start must precede end");
  if (!(w.confidence >= 0 && w.confidence <= 1))
    throw Error("hypothesis word '" + w.token + "': confidence outside [0, 1]");
}

std::vector<HypothesisWord> deduplicate(const std::vector<HypothesisWord>& words,
                                        double overlap_threshold) {
  std::vector<std::string> folded;
  folded.reserve(words.size());
  for (const auto& w : words) {
    validate(w);
    folded.push_back(fold(w.token));
  }
  std::vector<bool> removed(words.size(), false);
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const auto& a = words[i];
      const auto& b = words[j];
      if (a.utterance_id == b.utterance_id || folded[i] != folded[j]) continue;
      const double intersection = std::min(a.end, b.end) - std::max(a.start, b.start);
      const double shorter = std::min(a.end - a.start, b.end - b.start);
      if (intersection <= 0 || intersection < overlap_threshold * shorter) continue;
      removed[wins(a, b) ? j : i] = true;
    }
  }
  std::vector<HypothesisWord> out;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (!removed[i]) out.push_back(words[i]);
  return out;
}

std::vector<HypothesisWord> parse_ctm(const std::string& text) {
  std::vector<HypothesisWord> out;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    HypothesisWord w;
    double duration = 0;
    if (!(fields >> w.utterance_id >> w.speaker_id >> w.start >> duration >> w.token >> w.confidence))
      throw Error("ctm line " + std::to_string(number) + ": expected 6 fields");
    w.end = w.start + duration;
    validate(w);
    out.push_back(std::move(w));
  }
  return out;
}

std::string format_ctm(const std::vector<HypothesisWord>& words) {
  std::ostringstream out;
  char numbers[96];
  for (const auto& w : words) {
    std::snprintf(numbers, sizeof numbers, "%.3f %.3f", w.start, w.end - w.start);
    out << w.utterance_id << ' ' << w.speaker_id << ' ' << numbers << ' ' << w.token << ' ';
    std::snprintf(numbers, sizeof numbers, "%.4f", w.confidence);
    out << numbers << '\n';
  }
  return out.str();
}

}  // namespace gss
