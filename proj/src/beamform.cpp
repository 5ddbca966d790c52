#include "gss/beamform.hpp"

#include <cmath>

#include "gss/linalg.hpp"
#include "gss/parallel.hpp"

namespace gss {

PsdTensor estimate_psd(const MultiChannelSpectrogram& s, const RealMatrix& mask,
                       const std::vector<bool>& frame_selection) {
  if (mask.rows() != s.frames() || mask.cols() != s.frequencies())
    throw Error("estimate_psd: mask shape does not match the spectrogram");
  if (!frame_selection.empty() && static_cast<Eigen::Index>(frame_selection.size()) != s.frames())
    throw Error("estimate_psd: frame selection length does not match the spectrogram");

  const Eigen::Index channels = s.channels();
  PsdTensor psd(static_cast<std::size_t>(s.frequencies()));
  parallel_for(psd.size(), [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    RealVector weight = mask.col(f);
    if (!frame_selection.empty())
      for (Eigen::Index t = 0; t < s.frames(); ++t)
        if (!frame_selection[static_cast<std::size_t>(t)]) weight(t) = 0;
    const Real mass = weight.sum();
    if (!(mass > 0))
      throw Error("estimate_psd: selected mask sums to zero at frequency " + std::to_string(f));
    const ComplexMatrix yw = s.bin(f) * weight.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    ComplexMatrix acc = ComplexMatrix::Zero(channels, channels);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(yw);
    psd[fi] = ComplexMatrix(acc.selfadjointView<Eigen::Lower>()) / mass;
  });
  return psd;
}

CovariancePair estimate_covariances(const MultiChannelSpectrogram& s, const RealMatrix& target_mask,
                                    const RealMatrix& distortion_mask,
                                    const std::vector<bool>& frame_selection) {
  CovariancePair cov;
  cov.target_psd = estimate_psd(s, target_mask, frame_selection);
  cov.distortion_psd = estimate_psd(s, distortion_mask, frame_selection);
  cov.frame_count_used = s.frames();
  if (!frame_selection.empty()) {
    cov.frame_count_used = 0;
    for (bool b : frame_selection) cov.frame_count_used += b ? 1 : 0;
  }
  return cov;
}

Eigen::Index select_reference_channel(const CovariancePair& cov) {
  if (cov.target_psd.empty()) throw Error("select_reference_channel: empty covariance");
  const Eigen::Index channels = cov.target_psd.front().rows();
  RealVector target = RealVector::Zero(channels);
  RealVector distortion = RealVector::Zero(channels);
  for (std::size_t f = 0; f < cov.target_psd.size(); ++f) {
    target += cov.target_psd[f].diagonal().real();
    distortion += cov.distortion_psd[f].diagonal().real();
  }
  Eigen::Index best = 0;
  Real best_snr = -1;
  for (Eigen::Index c = 0; c < channels; ++c) {
    const Real snr = distortion(c) > 0 ? target(c) / distortion(c)
                                       : std::numeric_limits<Real>::infinity();
    if (snr > best_snr) {
      best_snr = snr;
      best = c;
    }
  }
  return best;
}

BeamformerWeights mvdr_souden(const CovariancePair& cov, Eigen::Index ref, Real loading) {
  if (cov.target_psd.size() != cov.distortion_psd.size() || cov.target_psd.empty())
    throw Error("mvdr_souden: inconsistent covariance pair");
  const Eigen::Index channels = cov.target_psd.front().rows();
  if (ref < 0 || ref >= channels) throw Error("mvdr_souden: reference channel out of range");

  BeamformerWeights out;
  out.reference_channel = ref;
  out.w = ComplexMatrix::Zero(static_cast<Eigen::Index>(cov.target_psd.size()), channels);
  parallel_for(cov.target_psd.size(), [&](std::size_t fi) {
    const auto llt = linalg::loaded_llt(cov.distortion_psd[fi], loading);
    const ComplexMatrix numerator = llt.solve(cov.target_psd[fi]);
    const Complex trace = numerator.trace();
    if (!(std::abs(trace) > 1e-300) || !std::isfinite(std::abs(trace)))
      throw NumericalError("mvdr_souden: vanishing trace at frequency " + std::to_string(fi));
    out.w.row(static_cast<Eigen::Index>(fi)) = (numerator.col(ref) / trace).transpose();
  });
  return out;
}

RealVector ban_gain(const BeamformerWeights& w, const PsdTensor& distortion_psd) {
  if (static_cast<Eigen::Index>(distortion_psd.size()) != w.w.rows())
    throw Error("ban_gain: frequency count mismatch");
  const auto channels = static_cast<Real>(w.w.cols());
  RealVector gain(w.w.rows());
  for (Eigen::Index f = 0; f < w.w.rows(); ++f) {
    const ComplexVector v = w.w.row(f).transpose();
    const ComplexVector pv = distortion_psd[static_cast<std::size_t>(f)] * v;
    const Real denominator = std::real(v.dot(pv));
    const Real numerator = pv.squaredNorm() / channels;
    gain(f) = denominator > 0 ? std::sqrt(numerator) / denominator : 0.0;
  }
  return gain;
}

BeamformerWeights apply_ban(const BeamformerWeights& w, const PsdTensor& distortion_psd) {
  BeamformerWeights out = w;
  out.w = ban_gain(w, distortion_psd).asDiagonal() * w.w;
  return out;
}

MultiChannelSpectrogram apply_beamformer(const BeamformerWeights& w,
                                         const MultiChannelSpectrogram& s) {
  if (w.w.cols() != s.channels() || w.w.rows() != s.frequencies())
    throw Error("apply_beamformer: weight shape does not match the spectrogram");
  MultiChannelSpectrogram out(1, s.frames(), s.config(), s.sample_rate());
  for (Eigen::Index f = 0; f < s.frequencies(); ++f)
    out.bin(f) = w.w.row(f).conjugate() * s.bin(f);
  return out;
}

}  // namespace gss
