#include "gss/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "gss/parallel.hpp"

namespace gss {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

RealVector periodic_hann(int n) {
  RealVector w(n);
  for (int i = 0; i < n; ++i) w(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

// Overlap-add sum of analysis * synthesis per hop phase; first is false when
// the sum varies with the phase.
std::pair<bool, double> overlap_add_constant(const StftConfig& cfg) {
  const RealVector product =
      analysis_window(cfg).cwiseProduct(synthesis_window(cfg));
  RealVector sums = RealVector::Zero(cfg.shift);
  for (int i = 0; i < cfg.fft_size; ++i) sums(i % cfg.shift) += product(i);
  const double mean = sums.mean();
  const double spread = sums.maxCoeff() - sums.minCoeff();
  return {mean > 0 && spread <= 1e-10 * mean, mean};
}

Eigen::Index reflect_index(Eigen::Index i, Eigen::Index length) {
  if (length == 1) return 0;
  const Eigen::Index period = 2 * (length - 1);
  i %= period;
  if (i < 0) i += period;
  return i < length ? i : period - i;
}

}  // namespace

void validate(const WaveformSegment& x) {
  if (x.sample_rate <= 0) throw ConfigError("sample_rate", "must be positive");
  if (!x.samples.allFinite()) throw Error("waveform contains non-finite samples");
}

RealVector analysis_window(const StftConfig& cfg) {
  RealVector w = periodic_hann(cfg.fft_size);
  if (cfg.window == WindowType::SqrtHann) w = w.cwiseSqrt();
  return w;
}

RealVector synthesis_window(const StftConfig& cfg) { return analysis_window(cfg); }

void validate(const StftConfig& cfg) {
  if (!is_power_of_two(cfg.fft_size) || cfg.fft_size < 4)
    throw ConfigError("fft_size", "must be a power of two >= 4");
  if (cfg.shift <= 0 || cfg.shift > cfg.fft_size)
    throw ConfigError("shift", "must lie in (0, fft_size]");
  if (!overlap_add_constant(cfg).first)
    throw ConfigError("shift", "window/shift pair violates the constant overlap-add condition");
}

int leading_padding(const StftConfig& cfg) { return cfg.fft_size - cfg.shift; }

Eigen::Index frame_count(const StftConfig& cfg, Eigen::Index length) {
  const Eigen::Index hops = (length + cfg.shift - 1) / cfg.shift;
  return hops + cfg.fft_size / cfg.shift - 1;
}

double frame_offset_seconds(const StftConfig& cfg, int sample_rate) {
  return 0.5 * static_cast<double>(cfg.shift - cfg.fft_size) / sample_rate;
}

MultiChannelSpectrogram::MultiChannelSpectrogram(Eigen::Index channels, Eigen::Index frames,
                                                 const StftConfig& cfg, int sample_rate)
    : channels_(channels),
      frames_(frames),
      config_(cfg),
      sample_rate_(sample_rate),
      bins_(cfg.fft_size / 2 + 1, ComplexMatrix::Zero(channels, frames)) {}

MultiChannelSpectrogram MultiChannelSpectrogram::select_channels(
    const std::vector<Eigen::Index>& channels) const {
  MultiChannelSpectrogram out(static_cast<Eigen::Index>(channels.size()), frames_, config_,
                              sample_rate_);
  for (Eigen::Index f = 0; f < frequencies(); ++f)
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (channels[c] < 0 || channels[c] >= channels_) throw Error("channel index out of range");
      out.bins_[f].row(static_cast<Eigen::Index>(c)) = bins_[f].row(channels[c]);
    }
  return out;
}

MultiChannelSpectrogram stft(const WaveformSegment& x, const StftConfig& cfg) {
  validate(cfg);
  if (x.channels() == 0 || x.length() == 0) throw Error("stft: empty signal");
  validate(x);

  const int n = cfg.fft_size;
  const Eigen::Index length = x.length();
  const Eigen::Index frames = frame_count(cfg, length);
  const Eigen::Index pad = leading_padding(cfg);
  const Eigen::Index bins = n / 2 + 1;
  const RealVector window = analysis_window(cfg);

  MultiChannelSpectrogram out(x.channels(), frames, cfg, x.sample_rate);
  parallel_for(static_cast<std::size_t>(x.channels()), [&](std::size_t ci) {
    const auto c = static_cast<Eigen::Index>(ci);
    Eigen::FFT<Real> fft;
    fft.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
    std::vector<Real> frame(n);
    std::vector<Complex> spectrum(n);
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (int i = 0; i < n; ++i) {
        Eigen::Index src = t * cfg.shift + i - pad;
        Real value = 0;
        if (src >= 0 && src < length) {
          value = x.samples(c, src);
        } else if (cfg.pad_mode == PadMode::Reflect) {
          value = x.samples(c, reflect_index(src, length));
        }
        frame[i] = value * window(i);
      }
      fft.fwd(spectrum.data(), frame.data(), n);
      for (Eigen::Index f = 0; f < bins; ++f) out(c, t, f) = spectrum[f];
    }
  });
  return out;
}

WaveformSegment istft(const MultiChannelSpectrogram& s, Eigen::Index out_len) {
  const StftConfig& cfg = s.config();
  validate(cfg);
  const int n = cfg.fft_size;
  if (s.frequencies() != n / 2 + 1) throw Error("istft: frequency count does not match fft_size");
  const Eigen::Index pad = leading_padding(cfg);
  const Eigen::Index reconstructable = std::max<Eigen::Index>(0, s.frames() * cfg.shift - pad);
  if (out_len < 0 || out_len > reconstructable)
    throw Error("istft: requested length " + std::to_string(out_len) +
                " exceeds reconstructable length " + std::to_string(reconstructable));

  const RealVector window = synthesis_window(cfg);
  const double norm = overlap_add_constant(cfg).second;
  const Eigen::Index padded_len = (s.frames() - 1) * cfg.shift + n;

  WaveformSegment out;
  out.sample_rate = s.sample_rate();
  out.samples = RealMatrix::Zero(s.channels(), out_len);
  parallel_for(static_cast<std::size_t>(s.channels()), [&](std::size_t ci) {
    const auto c = static_cast<Eigen::Index>(ci);
    Eigen::FFT<Real> fft;
    fft.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
    std::vector<Complex> spectrum(n);
    std::vector<Real> frame(n);
    RealVector acc = RealVector::Zero(padded_len);
    for (Eigen::Index t = 0; t < s.frames(); ++t) {
      for (Eigen::Index f = 0; f < s.frequencies(); ++f) spectrum[f] = s(c, t, f);
      // The half-spectrum inverse ignores the imaginary part of DC and Nyquist.
      fft.inv(frame.data(), spectrum.data(), n);
      for (int i = 0; i < n; ++i) acc(t * cfg.shift + i) += frame[i] * window(i);
    }
    out.samples.row(c) = acc.segment(pad, out_len).transpose() / norm;
  });
  return out;
}

WaveformSegment stack_arrays(const std::vector<WaveformSegment>& arrays, StackPolicy policy) {
  if (arrays.empty()) throw Error("stack_arrays: no arrays given");
  const int rate = arrays.front().sample_rate;
  Eigen::Index min_len = arrays.front().length();
  Eigen::Index total_channels = 0;
  for (const auto& a : arrays) {
    if (a.sample_rate != rate) throw Error("stack_arrays: mismatched sample rates");
    if (policy == StackPolicy::Strict && a.length() != arrays.front().length())
      throw Error("stack_arrays: mismatched lengths under strict policy");
    min_len = std::min(min_len, a.length());
    total_channels += a.channels();
  }
  WaveformSegment out;
  out.sample_rate = rate;
  out.start_offset = arrays.front().start_offset;
  out.samples.resize(total_channels, min_len);
  Eigen::Index row = 0;
  for (const auto& a : arrays) {
    out.samples.middleRows(row, a.channels()) = a.samples.leftCols(min_len);
    row += a.channels();
  }
  return out;
}

NormalizedBins unit_normalize_bins(const MultiChannelSpectrogram& s) {
  NormalizedBins out;
  out.bins.resize(static_cast<std::size_t>(s.frequencies()));
  out.zero_flags = BoolMatrix::Constant(s.frames(), s.frequencies(), false);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) {
    ComplexMatrix y = s.bin(f);
    for (Eigen::Index t = 0; t < s.frames(); ++t) {
      const Real norm = y.col(t).norm();
      if (norm > 0 && std::isfinite(norm)) {
        y.col(t) /= norm;
      } else {
        y.col(t).setZero();
        out.zero_flags(t, f) = true;
      }
    }
    out.bins[f] = std::move(y);
  }
  return out;
}

}  // namespace gss
