#include "doctest.h"

#include <cmath>

#include "gss/signal.hpp"
#include "test_util.hpp"

using namespace gss;

namespace {

double max_abs_diff(const RealMatrix& a, const RealMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("stft config validation") {
  StftConfig cfg;
  CHECK_NOTHROW(validate(cfg));

  cfg.fft_size = 1000;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = {};
  cfg.shift = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  // hann * hann does not overlap-add to a constant at half overlap
  cfg = {};
  cfg.window = WindowType::Hann;
  cfg.shift = 512;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.shift = 256;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("stft shape follows the frame-count formula") {
  StftConfig cfg;
  const auto x = test::segment(test::random_signal(2, 16000, 1));
  const auto s = stft(x, cfg);
  CHECK(s.channels() == 2);
  CHECK(s.frequencies() == 513);
  CHECK(s.frames() == frame_count(cfg, 16000));
  CHECK(s.frames() == 63 + 3);
}

TEST_CASE("stft of silence is zero") {
  const auto x = test::segment(RealMatrix::Zero(1, 16000));
  const auto s = stft(x, StftConfig{});
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) CHECK(s.bin(f).cwiseAbs().maxCoeff() == 0.0);
  const auto y = istft(s, 16000);
  CHECK(y.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("impulse at a frame centre gives a flat magnitude") {
  StftConfig cfg;
  const int pad = leading_padding(cfg);
  const Eigen::Index frame = 10;
  const Eigen::Index n0 = frame * cfg.shift - pad + cfg.fft_size / 2;
  RealMatrix x = RealMatrix::Zero(1, 8000);
  x(0, n0) = 1.0;
  const auto s = stft(test::segment(x), cfg);
  const double expected = analysis_window(cfg)(cfg.fft_size / 2);
  CHECK(expected == doctest::Approx(1.0));
  for (Eigen::Index f = 0; f < s.frequencies(); ++f)
    CHECK(std::abs(s(0, frame, f)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("stft round trip on a 4-channel signal") {
  StftConfig cfg;
  const RealMatrix x = test::random_signal(4, 32000, 2);
  const auto y = istft(stft(test::segment(x), cfg), x.cols());
  CHECK(max_abs_diff(y.samples, x) < 1e-6 * x.cwiseAbs().maxCoeff());
}

TEST_CASE("round trip over several configurations") {
  for (auto window : {WindowType::SqrtHann, WindowType::Hann})
    for (auto pad : {PadMode::Zero, PadMode::Reflect})
      for (int shift : {64, 128}) {
        StftConfig cfg{512, shift, window, pad};
        const RealMatrix x = test::random_signal(2, 3001, 3);
        const auto y = istft(stft(test::segment(x), cfg), x.cols());
        CHECK(max_abs_diff(y.samples, x) < 1e-6 * x.cwiseAbs().maxCoeff());
      }
}

TEST_CASE("stft is linear") {
  StftConfig cfg;
  const RealMatrix x = test::random_signal(2, 8000, 4);
  const RealMatrix y = test::random_signal(2, 8000, 5);
  const double a = 0.7, b = -2.5;
  const auto sx = stft(test::segment(x), cfg);
  const auto sy = stft(test::segment(y), cfg);
  const auto sz = stft(test::segment(a * x + b * y), cfg);
  for (Eigen::Index f = 0; f < sz.frequencies(); ++f) {
    const ComplexMatrix expected = a * sx.bin(f) + b * sy.bin(f);
    CHECK((sz.bin(f) - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
  }
}

TEST_CASE("istft of a single frame stays inside that frame") {
  StftConfig cfg;
  MultiChannelSpectrogram s(1, 20, cfg, 16000);
  const Eigen::Index frame = 8;
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) s(0, frame, f) = Complex(1.0, 0.5);
  const Eigen::Index length = 20 * cfg.shift - leading_padding(cfg);
  const auto y = istft(s, length);
  const Eigen::Index begin = frame * cfg.shift - leading_padding(cfg);
  const Eigen::Index end = begin + cfg.fft_size;
  double inside = 0;
  for (Eigen::Index n = 0; n < length; ++n) {
    if (n < begin || n >= end)
      CHECK(y.samples(0, n) == 0.0);
    else
      inside += std::abs(y.samples(0, n));
  }
  CHECK(inside > 0);
}

TEST_CASE("istft rejects a length beyond the frames") {
  StftConfig cfg;
  const auto s = stft(test::segment(test::random_signal(1, 4000, 6)), cfg);
  const Eigen::Index max_len = s.frames() * cfg.shift - leading_padding(cfg);
  CHECK_NOTHROW(istft(s, max_len));
  CHECK_THROWS_AS(istft(s, max_len + 1), Error);
}

TEST_CASE("stft rejects empty and non-finite input") {
  CHECK_THROWS_AS(stft(test::segment(RealMatrix(1, 0)), StftConfig{}), Error);
  RealMatrix x = RealMatrix::Zero(1, 100);
  x(0, 5) = std::nan("");
  CHECK_THROWS_AS(stft(test::segment(x), StftConfig{}), Error);
}

TEST_CASE("stack_arrays") {
  const RealMatrix a = test::random_signal(4, 1000, 7);
  const RealMatrix b = test::random_signal(4, 997, 8);

  SUBCASE("single array is unchanged") {
    const auto out = stack_arrays({test::segment(a)}, StackPolicy::Strict);
    CHECK(out.samples == a);
  }
  SUBCASE("six arrays give 24 channels in array order") {
    std::vector<WaveformSegment> arrays;
    for (int i = 0; i < 6; ++i) arrays.push_back(test::segment(test::random_signal(4, 500, 10 + i)));
    const auto out = stack_arrays(arrays, StackPolicy::Strict);
    REQUIRE(out.channels() == 24);
    for (int i = 0; i < 6; ++i) CHECK(out.samples.middleRows(4 * i, 4) == arrays[i].samples);
  }
  SUBCASE("truncate_to_min cuts to the shortest") {
    const auto out = stack_arrays({test::segment(a), test::segment(b)}, StackPolicy::TruncateToMin);
    REQUIRE(out.length() == 997);
    CHECK(out.samples.topRows(4) == a.leftCols(997));
    CHECK(out.samples.bottomRows(4) == b);
  }
  SUBCASE("strict rejects mismatched lengths") {
    CHECK_THROWS_AS(stack_arrays({test::segment(a), test::segment(b)}, StackPolicy::Strict), Error);
  }
  SUBCASE("mismatched rates are rejected") {
    CHECK_THROWS_AS(
        stack_arrays({test::segment(a), test::segment(a, 8000)}, StackPolicy::TruncateToMin), Error);
  }
}

TEST_CASE("unit_normalize_bins") {
  StftConfig cfg;
  SUBCASE("closed-form vector") {
    MultiChannelSpectrogram s(2, 1, cfg, 16000);
    s(0, 0, 3) = Complex(3, 0);
    s(1, 0, 3) = Complex(0, 4);
    const auto n = unit_normalize_bins(s);
    CHECK(n.bins[3](0, 0) == Complex(0.6, 0));
    CHECK(std::abs(n.bins[3](1, 0) - Complex(0, 0.8)) < 1e-15);
    CHECK_FALSE(n.zero_flags(0, 3));
    CHECK(n.zero_flags(0, 0));
    CHECK(n.bins[0].col(0).norm() == 0.0);
  }
  SUBCASE("unit norm everywhere and scale invariance") {
    const auto s = stft(test::segment(test::random_signal(3, 4000, 9)), cfg);
    const auto n = unit_normalize_bins(s);
    MultiChannelSpectrogram scaled = s;
    for (Eigen::Index f = 0; f < s.frequencies(); ++f) scaled.bin(f) *= -3.5;
    const auto m = unit_normalize_bins(scaled);
    for (Eigen::Index f = 0; f < s.frequencies(); ++f)
      for (Eigen::Index t = 0; t < s.frames(); ++t) {
        if (n.zero_flags(t, f)) continue;
        CHECK(std::abs(n.bins[f].col(t).norm() - 1.0) < 1e-12);
        CHECK((m.bins[f].col(t) + n.bins[f].col(t)).norm() < 1e-12);
      }
  }
}

TEST_CASE("select_channels keeps the requested order") {
  const auto s = stft(test::segment(test::random_signal(4, 2000, 11)), StftConfig{});
  const auto sub = s.select_channels({2, 0});
  REQUIRE(sub.channels() == 2);
  for (Eigen::Index f = 0; f < s.frequencies(); f += 50) {
    CHECK(sub.bin(f).row(0) == s.bin(f).row(2));
    CHECK(sub.bin(f).row(1) == s.bin(f).row(0));
  }
  CHECK_THROWS_AS(s.select_channels({4}), Error);
}
