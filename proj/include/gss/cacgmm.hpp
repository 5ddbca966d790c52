#pragma once

// Guided source separation: a mixture of complex angular central Gaussians
// over unit-normalized STFT vectors, with class count, posterior
// initialization and activity constraints taken from time annotations.

#include <functional>
#include <string>
#include <vector>

#include "gss/annotations.hpp"
#include "gss/signal.hpp"

namespace gss {

inline const std::string kNoiseClass = "noise";

/// Per-class time-frequency posteriors. gamma[k] is frames x frequencies.
struct MaskSet {
  std::vector<std::string> classes;
  std::vector<RealMatrix> gamma;

  Eigen::Index class_count() const { return static_cast<Eigen::Index>(classes.size()); }
  Eigen::Index frames() const { return gamma.empty() ? 0 : gamma.front().rows(); }
  Eigen::Index frequencies() const { return gamma.empty() ? 0 : gamma.front().cols(); }
  /// Index of `name` in classes, or -1.
  Eigen::Index index_of(const std::string& name) const;
};

struct CacgmmState {
  std::vector<std::string> classes;
  /// shape[f][k]: Hermitian positive definite, trace equal to the channel count.
  std::vector<std::vector<ComplexMatrix>> shape;
  /// frames x classes, rows sum to one over admissible classes.
  RealMatrix weights;
};

struct GssConfig {
  int iterations = 20;
  Real inverse_regularization = 1e-10;
  bool include_noise_class = true;
};

/// Class activity derived from speaker activity: frames x classes, speakers in
/// pattern order followed by the always-active noise class when included.
BoolMatrix class_activity(const ActivityPattern& act, bool include_noise);

/// Uniform posteriors over the classes admissible at each frame.
MaskSet init_posteriors(const ActivityPattern& act, Eigen::Index frames, Eigen::Index frequencies,
                        bool include_noise);

/// Initial model: scaled-identity shapes followed by one M-step driven by
/// `posteriors`.
CacgmmState initial_state(const NormalizedBins& obs, const MaskSet& posteriors,
                          const BoolMatrix& admissible, Real inverse_regularization);

struct EmStepResult {
  CacgmmState state;
  MaskSet masks;
  Real log_likelihood = 0;  // evaluated at the incoming state
};

/// One E-step followed by one M-step. Posteriors of classes not admissible at
/// a frame are exactly zero.
EmStepResult em_step(const CacgmmState& state, const NormalizedBins& obs,
                     const BoolMatrix& admissible, Real inverse_regularization);

/// Convenience overload taking the activity pattern directly.
EmStepResult em_step(const CacgmmState& state, const NormalizedBins& obs,
                     const ActivityPattern& act, const GssConfig& cfg);

/// Called after every EM iteration with the 1-based iteration number.
using GssObserver = std::function<void(int, const EmStepResult&)>;

struct GssResult {
  MaskSet masks;
  std::vector<Real> log_likelihoods;
};

GssResult run_gss_traced(const MultiChannelSpectrogram& s, const ActivityPattern& act,
                         const GssConfig& cfg, const GssObserver& observer = {});

MaskSet run_gss(const MultiChannelSpectrogram& s, const ActivityPattern& act, const GssConfig& cfg);

struct TargetMasks {
  RealMatrix target;      // frames x frequencies
  RealMatrix distortion;  // sum of every other class
};

TargetMasks extract_masks(const MaskSet& masks, const std::string& target);

/// Binary mask export: "GSSMASK1", little-endian u32 classes, frames,
/// frequencies, then class-major, frame-major float32 values. Class names go
/// to `<path>.classes.txt`, one per line.
void write_masks(const std::string& path, const MaskSet& masks);
MaskSet read_masks(const std::string& path);

}  // namespace gss
