#pragma once

#include "gss/signal.hpp"

namespace gss {

/// Weighted prediction error dereverberation settings.
struct WpeConfig {
  int taps = 10;        // filter length in frames
  int delay = 2;        // prediction delay in frames
  int iterations = 3;
  Real psd_floor = 1e-10;
  Real regularization = 1e-6;  // diagonal loading, relative to trace / dim
};

void validate(const WpeConfig& cfg);

/// Offline multichannel WPE. Each frequency bin is processed independently:
/// alternate between a channel-averaged power estimate of the current output
/// and a power-weighted least-squares linear prediction from delayed frames,
/// then subtract the prediction.
MultiChannelSpectrogram wpe(const MultiChannelSpectrogram& s, const WpeConfig& cfg);

/// Single-bin version operating on a channels x frames matrix.
ComplexMatrix wpe_bin(const ComplexMatrix& y, const WpeConfig& cfg);

}  // namespace gss
