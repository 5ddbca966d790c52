#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "gss/scene.hpp"
#include "gss/signal.hpp"

namespace gss::test {

inline RealMatrix random_signal(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix x(channels, length);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = Complex(n(rng), n(rng));
  return x;
}

inline WaveformSegment segment(RealMatrix samples, int sample_rate = 16000) {
  WaveformSegment w;
  w.samples = std::move(samples);
  w.sample_rate = sample_rate;
  return w;
}

/// Small anechoic single-array scene used by several suites.
inline SceneConfig small_scene(std::uint64_t seed, int speakers = 2, double duration = 12.0) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.speakers = speakers;
  cfg.arrays = 1;
  cfg.duration = duration;
  cfg.overlap_ratio = 0.4;
  return cfg;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gss_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gss::test
