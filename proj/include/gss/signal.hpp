#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gss/types.hpp"

namespace gss {

/// Real multichannel audio: one row per channel.
struct WaveformSegment {
  RealMatrix samples;      // channels x time
  int sample_rate = 16000;
  double start_offset = 0; // seconds into the recording

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }
};

/// Checks finite values and a positive sample rate.
void validate(const WaveformSegment& x);

enum class WindowType { SqrtHann, Hann };
enum class PadMode { Zero, Reflect };

struct StftConfig {
  int fft_size = 1024;
  int shift = 256;
  WindowType window = WindowType::SqrtHann;
  PadMode pad_mode = PadMode::Zero;
};

/// Throws ConfigError unless fft_size is a power of two, 0 < shift <= fft_size
/// and the analysis/synthesis window pair overlap-adds to a constant.
void validate(const StftConfig& cfg);

/// Periodic analysis window of length fft_size.
RealVector analysis_window(const StftConfig& cfg);
/// Synthesis window; istft divides by the constant overlap-add sum of
/// analysis * synthesis.
RealVector synthesis_window(const StftConfig& cfg);

/// Samples of padding inserted before the first sample.
int leading_padding(const StftConfig& cfg);
/// Number of frames produced for a signal of `length` samples.
Eigen::Index frame_count(const StftConfig& cfg, Eigen::Index length);
/// Offset in seconds of the activity span of frame 0 relative to the first
/// sample. Frame t covers [offset + t*shift, offset + (t+1)*shift) around the
/// window centre.
double frame_offset_seconds(const StftConfig& cfg, int sample_rate);

/// Complex STFT tensor stored frequency-major: bins[f] is channels x frames.
class MultiChannelSpectrogram {
 public:
  MultiChannelSpectrogram() = default;
  MultiChannelSpectrogram(Eigen::Index channels, Eigen::Index frames, const StftConfig& cfg,
                          int sample_rate);

  Eigen::Index channels() const { return channels_; }
  Eigen::Index frames() const { return frames_; }
  Eigen::Index frequencies() const { return static_cast<Eigen::Index>(bins_.size()); }

  const StftConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }

  Complex& operator()(Eigen::Index c, Eigen::Index t, Eigen::Index f) { return bins_[f](c, t); }
  const Complex& operator()(Eigen::Index c, Eigen::Index t, Eigen::Index f) const {
    return bins_[f](c, t);
  }

  /// All channels and frames of one frequency bin.
  ComplexMatrix& bin(Eigen::Index f) { return bins_[f]; }
  const ComplexMatrix& bin(Eigen::Index f) const { return bins_[f]; }

  /// Keeps only the listed channels, in the given order.
  MultiChannelSpectrogram select_channels(const std::vector<Eigen::Index>& channels) const;

 private:
  Eigen::Index channels_ = 0;
  Eigen::Index frames_ = 0;
  StftConfig config_;
  int sample_rate_ = 16000;
  std::vector<ComplexMatrix> bins_;
};

MultiChannelSpectrogram stft(const WaveformSegment& x, const StftConfig& cfg);

/// Overlap-add synthesis, trimmed to out_len samples. Throws if out_len is
/// longer than the frames can reconstruct.
WaveformSegment istft(const MultiChannelSpectrogram& s, Eigen::Index out_len);

enum class StackPolicy { Strict, TruncateToMin };

/// Concatenates channels of several arrays (array order, then channel order).
WaveformSegment stack_arrays(const std::vector<WaveformSegment>& arrays, StackPolicy policy);

struct NormalizedBins {
  std::vector<ComplexMatrix> bins;  // per frequency, channels x frames, unit columns
  BoolMatrix zero_flags;            // frames x frequencies
};

/// Divides each (t, f) channel vector by its Euclidean norm; zero vectors are
/// flagged and left at zero.
NormalizedBins unit_normalize_bins(const MultiChannelSpectrogram& s);

}  // namespace gss
