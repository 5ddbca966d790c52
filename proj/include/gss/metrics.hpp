#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gss/scene.hpp"

namespace gss {

inline constexpr double kSiSdrCap = 100.0;

/// Scale-invariant SDR in dB, capped at kSiSdrCap. The reference must be
/// nonzero and both signals must have equal length.
template <typename EstimateDerived, typename ReferenceDerived>
double si_sdr(const Eigen::MatrixBase<EstimateDerived>& estimate,
              const Eigen::MatrixBase<ReferenceDerived>& reference) {
  if (estimate.size() != reference.size()) throw Error("si_sdr: length mismatch");
  const auto est = estimate.template cast<double>().reshaped().eval();
  const auto ref = reference.template cast<double>().reshaped().eval();
  const double ref_energy = ref.squaredNorm();
  if (!(ref_energy > 0)) throw Error("si_sdr: zero reference");
  const double alpha = est.dot(ref) / ref_energy;
  const double target = (alpha * ref).squaredNorm();
  const double error = (alpha * ref - est).squaredNorm();
  if (error <= 0) return kSiSdrCap;
  if (target <= 0) return -kSiSdrCap;
  return std::min(kSiSdrCap, 10.0 * std::log10(target / error));
}

/// Pearson correlation of two equally sized arrays; 0 when either is constant.
template <typename A, typename B>
double pearson(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw Error("pearson: size mismatch");
  const auto x = a.template cast<double>().reshaped().eval();
  const auto y = b.template cast<double>().reshaped().eval();
  const auto xc = (x.array() - x.mean()).matrix().eval();
  const auto yc = (y.array() - y.mean()).matrix().eval();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  return denom > 0 ? xc.dot(yc) / denom : 0.0;
}

struct EnhancedUtterance {
  std::string utterance_id;
  std::string speaker_id;
  RealVector waveform;        // covers exactly the annotated utterance
  int reference_array = 0;    // channel the beamformer was referenced to
  int reference_channel = 0;
  std::optional<MaskSet> masks;
  Eigen::Index mask_frame_offset = 0;  // scene frame index of mask frame 0
};

struct UtteranceScore {
  std::string utterance_id;
  std::string speaker_id;
  double si_sdr_in = 0;
  double si_sdr_out = 0;
  double improvement = 0;
};

struct EvalReport {
  std::string condition = "default";
  std::vector<UtteranceScore> utterances;
  double mean_in = 0, mean_out = 0, mean_improvement = 0, median_improvement = 0;
  std::map<std::string, double> mask_correlation;  // class -> mean Pearson r
};

/// Sample window [start, end) of an annotated utterance.
std::pair<Eigen::Index, Eigen::Index> utterance_samples(const UtteranceAnnotation& u, int sample_rate);

/// Per-utterance SI-SDR of the enhanced signal against the target's clean
/// image at the reference channel, compared with the raw mixture at that
/// channel over the same window.
EvalReport evaluate_scene(const SceneGroundTruth& gt, const std::vector<EnhancedUtterance>& enhanced,
                          const std::string& condition = "default");

/// Mean Pearson correlation per class between `masks` and the scene's oracle
/// masks over the overlapping frames.
std::map<std::string, double> mask_correlation(const MaskSet& masks, const MaskSet& oracle,
                                               Eigen::Index frame_offset);

std::string format_report_tsv(const std::vector<EvalReport>& reports);
std::string format_report_json(const std::vector<EvalReport>& reports);

}  // namespace gss
