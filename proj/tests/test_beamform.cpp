#include "doctest.h"

#include "gss/beamform.hpp"
#include "gss/linalg.hpp"
#include "test_util.hpp"

using namespace gss;

namespace {

StftConfig tiny_stft() { return StftConfig{8, 2, WindowType::SqrtHann, PadMode::Zero}; }  // 5 bins

CovariancePair pair_with(const ComplexMatrix& xx, const ComplexMatrix& nn, Eigen::Index freqs) {
  CovariancePair cov;
  cov.target_psd.assign(static_cast<std::size_t>(freqs), xx);
  cov.distortion_psd.assign(static_cast<std::size_t>(freqs), nn);
  return cov;
}

}  // namespace

TEST_CASE("estimate_psd") {
  MultiChannelSpectrogram s(3, 40, tiny_stft(), 16000);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) s.bin(f) = test::random_complex(3, 40, 30 + f);

  SUBCASE("unit mask is the sample covariance") {
    const auto psd = estimate_psd(s, RealMatrix::Ones(40, s.frequencies()));
    for (Eigen::Index f = 0; f < s.frequencies(); ++f) {
      const ComplexMatrix expected = s.bin(f) * s.bin(f).adjoint() / 40.0;
      CHECK((psd[f] - expected).norm() < 1e-12 * expected.norm());
      CHECK(linalg::hermitian_defect(psd[f]) < 1e-10);
    }
  }
  SUBCASE("frame selection equals the cropped spectrogram") {
    RealMatrix mask = RealMatrix::Constant(40, s.frequencies(), 0.3);
    mask.middleRows(10, 5).setConstant(0.9);
    std::vector<bool> sel(40, false);
    for (int t = 8; t < 25; ++t) sel[static_cast<std::size_t>(t)] = true;
    const auto psd = estimate_psd(s, mask, sel);
    for (Eigen::Index f = 0; f < s.frequencies(); ++f) {
      const ComplexMatrix y = s.bin(f).middleCols(8, 17);
      const RealVector m = mask.col(f).segment(8, 17);
      const ComplexMatrix expected = y * m.asDiagonal() * y.adjoint() / m.sum();
      CHECK((psd[f] - expected).norm() < 1e-12 * expected.norm());
    }
  }
  SUBCASE("zero mask is rejected") {
    CHECK_THROWS_AS(estimate_psd(s, RealMatrix::Zero(40, s.frequencies())), Error);
    RealMatrix mask = RealMatrix::Ones(40, s.frequencies());
    std::vector<bool> none(40, false);
    CHECK_THROWS_AS(estimate_psd(s, mask, none), Error);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(estimate_psd(s, RealMatrix::Ones(39, s.frequencies())), Error);
  }
}

TEST_CASE("mvdr is distortionless for a rank-one target and white noise") {
  const Eigen::Index dim = 4, frames = 30;
  MultiChannelSpectrogram x(dim, frames, tiny_stft(), 16000);
  const ComplexMatrix d = test::random_complex(dim, x.frequencies(), 40);
  const ComplexMatrix src = test::random_complex(x.frequencies(), frames, 41);
  CovariancePair cov;
  for (Eigen::Index f = 0; f < x.frequencies(); ++f) {
    x.bin(f) = d.col(f) * src.row(f);
    cov.target_psd.push_back(2.5 * d.col(f) * d.col(f).adjoint());
    cov.distortion_psd.push_back(ComplexMatrix::Identity(dim, dim));
  }
  for (Eigen::Index ref : {0, 2}) {
    const auto w = mvdr_souden(cov, ref, 0.0);
    CHECK(w.reference_channel == ref);
    const auto y = apply_beamformer(w, x);
    REQUIRE(y.channels() == 1);
    for (Eigen::Index f = 0; f < x.frequencies(); ++f) {
      const ComplexMatrix expected = x.bin(f).row(ref);
      CHECK((y.bin(f) - expected).norm() <= 1e-5 * expected.norm());
    }
  }
}

TEST_CASE("mvdr closed forms") {
  SUBCASE("single channel passes through") {
    const ComplexMatrix one = ComplexMatrix::Constant(1, 1, Complex(3.0, 0));
    const auto w = mvdr_souden(pair_with(one, one * 0.1, 5), 0);
    for (Eigen::Index f = 0; f < 5; ++f) CHECK(std::abs(w.w(f, 0) - 1.0) < 1e-12);
  }
  SUBCASE("noise scaling leaves the weights unchanged") {
    const ComplexMatrix a = test::random_complex(4, 12, 50);
    const ComplexMatrix b = test::random_complex(4, 12, 51);
    const ComplexMatrix xx = a * a.adjoint();
    const ComplexMatrix nn = b * b.adjoint();
    const auto w1 = mvdr_souden(pair_with(xx, nn, 3), 1);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
      const auto w2 = mvdr_souden(pair_with(xx, c * nn, 3), 1);
      CHECK((w1.w - w2.w).cwiseAbs().maxCoeff() < 1e-10 * w1.w.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("bad reference and zero target") {
    const ComplexMatrix i4 = ComplexMatrix::Identity(4, 4);
    CHECK_THROWS_AS(mvdr_souden(pair_with(i4, i4, 2), 4), Error);
    CHECK_THROWS_AS(mvdr_souden(pair_with(ComplexMatrix::Zero(4, 4), i4, 2), 0), Error);
  }
}

TEST_CASE("ban gain") {
  const Eigen::Index dim = 4;
  BeamformerWeights w;
  w.w = ComplexMatrix::Zero(3, dim);
  w.w.col(0).setOnes();
  const PsdTensor white(3, ComplexMatrix::Identity(dim, dim));

  SUBCASE("identity noise and a unit vector") {
    const RealVector g = ban_gain(w, white);
    for (Eigen::Index f = 0; f < 3; ++f) CHECK(std::abs(g(f) - 0.5) < 1e-10);
  }
  SUBCASE("scaled weights keep g w invariant under white noise") {
    BeamformerWeights v;
    v.w = test::random_complex(3, dim, 60);
    const PsdTensor scaled_white(3, 3.0 * ComplexMatrix::Identity(dim, dim));
    const auto a = apply_ban(v, scaled_white);
    BeamformerWeights u = v;
    u.w *= Complex(-2.0, 1.0);
    const auto b = apply_ban(u, scaled_white);
    const RealVector gv = ban_gain(v, scaled_white);
    const RealVector gu = ban_gain(u, scaled_white);
    for (Eigen::Index f = 0; f < 3; ++f) CHECK(gu(f) == doctest::Approx(gv(f) / std::sqrt(5.0)));
    CHECK((a.w.cwiseAbs() - b.w.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero beamformer") {
    BeamformerWeights z;
    z.w = ComplexMatrix::Zero(3, dim);
    CHECK(ban_gain(z, white).isZero());
  }
}

TEST_CASE("apply_beamformer") {
  MultiChannelSpectrogram s(3, 10, tiny_stft(), 16000);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) s.bin(f) = test::random_complex(3, 10, 70 + f);
  BeamformerWeights e;
  e.w = ComplexMatrix::Zero(s.frequencies(), 3);
  e.w.col(1).setOnes();
  const auto y = apply_beamformer(e, s);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) CHECK(y.bin(f) == s.bin(f).row(1));

  BeamformerWeights zero;
  zero.w = ComplexMatrix::Zero(s.frequencies(), 3);
  const auto z = apply_beamformer(zero, s);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) CHECK(z.bin(f).isZero());

  BeamformerWeights r;
  r.w = test::random_complex(s.frequencies(), 3, 80);
  MultiChannelSpectrogram s2 = s;
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) s2.bin(f) = test::random_complex(3, 10, 90 + f);
  MultiChannelSpectrogram sum = s;
  for (Eigen::Index f = 0; f < s.frequencies(); ++f) sum.bin(f) = 2.0 * s.bin(f) - s2.bin(f);
  const auto ya = apply_beamformer(r, s), yb = apply_beamformer(r, s2), yc = apply_beamformer(r, sum);
  for (Eigen::Index f = 0; f < s.frequencies(); ++f)
    CHECK((yc.bin(f) - (2.0 * ya.bin(f) - yb.bin(f))).norm() < 1e-12);

  BeamformerWeights wrong;
  wrong.w = ComplexMatrix::Zero(s.frequencies(), 2);
  CHECK_THROWS_AS(apply_beamformer(wrong, s), Error);
}

TEST_CASE("reference selection prefers the highest-snr channel, lowest index on ties") {
  ComplexMatrix xx = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix nn = ComplexMatrix::Identity(3, 3);
  CHECK(select_reference_channel(pair_with(xx, nn, 4)) == 0);
  xx(2, 2) = 5.0;
  CHECK(select_reference_channel(pair_with(xx, nn, 4)) == 2);
}
