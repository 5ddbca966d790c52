#include "gss/dereverb.hpp"

#include <algorithm>

#include "gss/linalg.hpp"
#include "gss/parallel.hpp"

namespace gss {

void validate(const WpeConfig& cfg) {
  if (cfg.taps < 1) throw ConfigError("taps", "must be >= 1");
  if (cfg.delay < 1) throw ConfigError("delay", "must be >= 1");
  if (cfg.iterations < 1) throw ConfigError("iterations", "must be >= 1");
  if (cfg.psd_floor < 0) throw ConfigError("psd_floor", "must be non-negative");
  if (cfg.regularization < 0) throw ConfigError("regularization", "must be non-negative");
}

ComplexMatrix wpe_bin(const ComplexMatrix& y, const WpeConfig& cfg) {
  const Eigen::Index channels = y.rows();
  const Eigen::Index frames = y.cols();
  const Eigen::Index dim = channels * cfg.taps;

  // Row block k holds the observation delayed by (delay + k) frames.
  ComplexMatrix delayed = ComplexMatrix::Zero(dim, frames);
  for (int k = 0; k < cfg.taps; ++k) {
    const Eigen::Index lag = cfg.delay + k;
    if (lag >= frames) continue;
    delayed.block(k * channels, lag, channels, frames - lag) = y.leftCols(frames - lag);
  }

  ComplexMatrix z = y;
  RealVector inv_power(frames);
  ComplexMatrix weighted(dim, frames);
  ComplexMatrix correlation(dim, dim);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Real power = std::max(z.col(t).squaredNorm() / channels, cfg.psd_floor);
      inv_power(t) = power > 0 ? 1.0 / power : 0.0;
    }
    weighted = delayed * inv_power.cwiseSqrt().asDiagonal();
    correlation.setZero();
    correlation.selfadjointView<Eigen::Lower>().rankUpdate(weighted);
    correlation = correlation.selfadjointView<Eigen::Lower>();
    const ComplexMatrix cross = delayed * inv_power.asDiagonal() * y.adjoint();
    const auto llt = linalg::loaded_llt(correlation, cfg.regularization);
    const ComplexMatrix filter = llt.solve(cross);
    z = y - filter.adjoint() * delayed;
  }
  return z;
}

MultiChannelSpectrogram wpe(const MultiChannelSpectrogram& s, const WpeConfig& cfg) {
  validate(cfg);
  if (s.frames() <= cfg.taps + cfg.delay)
    throw Error("wpe: need more than taps + delay frames");
  MultiChannelSpectrogram out = s;
  parallel_for(static_cast<std::size_t>(s.frequencies()), [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    if (!s.bin(f).allFinite()) throw NumericalError("wpe: non-finite input");
    out.bin(f) = wpe_bin(s.bin(f), cfg);
  });
  return out;
}

}  // namespace gss
