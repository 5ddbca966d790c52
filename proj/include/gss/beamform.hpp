#pragma once

#include <vector>

#include "gss/signal.hpp"

namespace gss {

using PsdTensor = std::vector<ComplexMatrix>;  // per frequency, channels x channels

struct CovariancePair {
  PsdTensor target_psd;
  PsdTensor distortion_psd;
  Eigen::Index frame_count_used = 0;
};

struct BeamformerWeights {
  ComplexMatrix w;  // frequencies x channels
  Eigen::Index reference_channel = 0;
};

enum class ReferencePolicy { MaxSnr, Fixed };

/// Mask-weighted spatial covariance over the selected frames:
/// sum_t m(t,f) y y^H / sum_t m(t,f). An empty selection means all frames.
PsdTensor estimate_psd(const MultiChannelSpectrogram& s, const RealMatrix& mask,
                       const std::vector<bool>& frame_selection = {});

/// Target and distortion covariances from complementary masks.
CovariancePair estimate_covariances(const MultiChannelSpectrogram& s, const RealMatrix& target_mask,
                                    const RealMatrix& distortion_mask,
                                    const std::vector<bool>& frame_selection = {});

/// Channel maximizing sum_f Phi_xx(c,c) / sum_f Phi_nn(c,c); ties go to the
/// lowest index.
Eigen::Index select_reference_channel(const CovariancePair& cov);

/// MVDR weights without a steering vector:
/// w = (Phi_nn^-1 Phi_xx / trace(Phi_nn^-1 Phi_xx)) e_ref, with Phi_nn loaded
/// by `loading * trace(Phi_nn) / D` before inversion.
BeamformerWeights mvdr_souden(const CovariancePair& cov, Eigen::Index ref, Real loading = 1e-6);

/// Blind analytic normalization gain per frequency,
/// sqrt(w^H Phi_nn Phi_nn w / D) / (w^H Phi_nn w); zero for a zero beamformer.
RealVector ban_gain(const BeamformerWeights& w, const PsdTensor& distortion_psd);

/// Weights scaled by ban_gain.
BeamformerWeights apply_ban(const BeamformerWeights& w, const PsdTensor& distortion_psd);

/// out(t, f) = w(f)^H y(t, f); single-channel result.
MultiChannelSpectrogram apply_beamformer(const BeamformerWeights& w,
                                         const MultiChannelSpectrogram& s);

}  // namespace gss
