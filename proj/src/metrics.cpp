#include "gss/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace gss {

std::pair<Eigen::Index, Eigen::Index> utterance_samples(const UtteranceAnnotation& u,
                                                        int sample_rate) {
  return {static_cast<Eigen::Index>(std::llround(u.start * sample_rate)),
          static_cast<Eigen::Index>(std::llround(u.end * sample_rate))};
}

std::map<std::string, double> mask_correlation(const MaskSet& masks, const MaskSet& oracle,
                                               Eigen::Index frame_offset) {
  std::map<std::string, double> out;
  const Eigen::Index first = std::max<Eigen::Index>(0, frame_offset);
  const Eigen::Index last = std::min(oracle.frames(), frame_offset + masks.frames());
  if (last <= first || masks.frequencies() != oracle.frequencies()) return out;
  for (Eigen::Index k = 0; k < masks.class_count(); ++k) {
    const Eigen::Index o = oracle.index_of(masks.classes[static_cast<std::size_t>(k)]);
    if (o < 0) continue;
    const auto& est = masks.gamma[static_cast<std::size_t>(k)];
    const auto& ref = oracle.gamma[static_cast<std::size_t>(o)];
    out[masks.classes[static_cast<std::size_t>(k)]] =
        pearson(est.middleRows(first - frame_offset, last - first), ref.middleRows(first, last - first));
  }
  return out;
}

EvalReport evaluate_scene(const SceneGroundTruth& gt, const std::vector<EnhancedUtterance>& enhanced,
                          const std::string& condition) {
  EvalReport report;
  report.condition = condition;
  std::map<std::string, std::vector<double>> correlations;
  for (const auto& e : enhanced) {
    const auto it = std::find_if(gt.utterances.begin(), gt.utterances.end(),
                                 [&](const auto& u) { return u.utterance_id == e.utterance_id; });
    if (it == gt.utterances.end()) throw Error("evaluate_scene: unknown utterance " + e.utterance_id);
    if (it->speaker_id != e.speaker_id)
      throw Error("evaluate_scene: speaker mismatch for utterance " + e.utterance_id);
    const auto spk = std::find(gt.speakers.begin(), gt.speakers.end(), e.speaker_id) - gt.speakers.begin();
    if (e.reference_array < 0 || e.reference_array >= static_cast<int>(gt.mixtures.size()))
      throw Error("evaluate_scene: reference array out of range");
    const auto& mix = gt.mixtures[static_cast<std::size_t>(e.reference_array)].samples;
    const auto& img = gt.clean_images[static_cast<std::size_t>(spk)][static_cast<std::size_t>(e.reference_array)].samples;
    if (e.reference_channel < 0 || e.reference_channel >= mix.rows())
      throw Error("evaluate_scene: reference channel out of range");
    auto [s0, s1] = utterance_samples(*it, gt.config.sample_rate);
    s1 = std::min<Eigen::Index>(s1, mix.cols());
    if (e.waveform.size() != s1 - s0)
      throw Error("evaluate_scene: enhanced signal for " + e.utterance_id + " has " +
                  std::to_string(e.waveform.size()) + " samples, expected " + std::to_string(s1 - s0));
    const auto reference = img.row(e.reference_channel).segment(s0, s1 - s0);
    UtteranceScore score;
    score.utterance_id = e.utterance_id;
    score.speaker_id = e.speaker_id;
    score.si_sdr_in = si_sdr(mix.row(e.reference_channel).segment(s0, s1 - s0), reference);
    score.si_sdr_out = si_sdr(e.waveform.transpose(), reference);
    score.improvement = score.si_sdr_out - score.si_sdr_in;
    report.utterances.push_back(score);
    if (e.masks)
      for (const auto& [name, r] : mask_correlation(*e.masks, gt.oracle_masks, e.mask_frame_offset))
        correlations[name].push_back(r);
  }
  if (!report.utterances.empty()) {
    std::vector<double> gains;
    for (const auto& u : report.utterances) {
      report.mean_in += u.si_sdr_in;
      report.mean_out += u.si_sdr_out;
      gains.push_back(u.improvement);
    }
    const auto n = static_cast<double>(report.utterances.size());
    report.mean_in /= n;
    report.mean_out /= n;
    report.mean_improvement = report.mean_out - report.mean_in;
    std::sort(gains.begin(), gains.end());
    const std::size_t mid = gains.size() / 2;
    report.median_improvement =
        gains.size() % 2 ? gains[mid] : 0.5 * (gains[mid - 1] + gains[mid]);
  }
  for (const auto& [name, values] : correlations) {
    double sum = 0;
    for (double v : values) sum += v;
    report.mask_correlation[name] = sum / static_cast<double>(values.size());
  }
  return report;
}

std::string format_report_tsv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "condition\tutterance_id\tspeaker_id\tsi_sdr_in\tsi_sdr_out\timprovement\n";
  char line[256];
  for (const auto& r : reports) {
    for (const auto& u : r.utterances) {
      std::snprintf(line, sizeof line, "%.4f\t%.4f\t%.4f", u.si_sdr_in, u.si_sdr_out, u.improvement);
      out << r.condition << '\t' << u.utterance_id << '\t' << u.speaker_id << '\t' << line << '\n';
    }
    std::snprintf(line, sizeof line, "%.4f\t%.4f\t%.4f", r.mean_in, r.mean_out, r.mean_improvement);
    out << r.condition << "\tMEAN\t-\t" << line << '\n';
    std::snprintf(line, sizeof line, "-\t-\t%.4f", r.median_improvement);
    out << r.condition << "\tMEDIAN\t-\t" << line << '\n';
  }
  return out.str();
}

std::string format_report_json(const std::vector<EvalReport>& reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json utts = nlohmann::json::array();
    for (const auto& u : r.utterances)
      utts.push_back({{"utterance_id", u.utterance_id},
                      {"speaker_id", u.speaker_id},
                      {"si_sdr_in", u.si_sdr_in},
                      {"si_sdr_out", u.si_sdr_out},
                      {"improvement", u.improvement}});
    doc.push_back({{"condition", r.condition},
                   {"utterances", utts},
                   {"aggregate",
                    {{"mean_si_sdr_in", r.mean_in},
                     {"mean_si_sdr_out", r.mean_out},
                     {"mean_improvement", r.mean_improvement},
                     {"median_improvement", r.median_improvement}}},
                   {"mask_correlation", r.mask_correlation}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace gss
