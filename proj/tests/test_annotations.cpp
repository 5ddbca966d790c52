#include "doctest.h"

#include <random>

#include "gss/annotations.hpp"

using namespace gss;

namespace {

UtteranceAnnotation utt(const std::string& spk, double s, double e, const std::string& id = "u") {
  return {id, spk, s, e};
}

// Frame t of pattern `act` overlaps [s, e), computed directly from the definition.
bool frame_overlaps(const ActivityPattern& act, Eigen::Index t, double s, double e) {
  const double f0 = act.frame_offset + static_cast<double>(t) * act.frame_shift;
  return f0 < e && s < f0 + act.frame_shift;
}

}  // namespace

TEST_CASE("extend_context") {
  ContextConfig ctx;
  CHECK(extend_context(utt("A", 20, 30), ctx, 120) == std::pair{5.0, 45.0});
  CHECK(extend_context(utt("A", 4, 10), ctx, 120) == std::pair{0.0, 25.0});
  CHECK(extend_context(utt("A", 100, 110), ctx, 120) == std::pair{85.0, 120.0});
  CHECK(extend_context(utt("A", 4, 10), ContextConfig{0, 0}, 120) == std::pair{4.0, 10.0});
  CHECK_THROWS_AS(extend_context(utt("A", 4, 10), ctx, 9.0), Error);
  CHECK_THROWS_AS(extend_context(utt("A", 4, 10), ContextConfig{-1, 0}, 20), ConfigError);
  CHECK_THROWS_AS(extend_context(utt("A", 5, 5), ctx, 20), Error);
}

TEST_CASE("extend_context stays inside the recording and contains the utterance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    const double len = 1 + 100 * u(rng);
    const double s = len * u(rng) * 0.99;
    const double e = s + (len - s) * (0.01 + 0.99 * u(rng));
    const ContextConfig ctx{20 * u(rng), 20 * u(rng)};
    const auto [a, b] = extend_context(utt("A", s, e), ctx, len);
    CHECK(a >= 0);
    CHECK(b <= len);
    CHECK(a <= s);
    CHECK(b >= e);
  }
}

TEST_CASE("build_activity") {
  SUBCASE("utterance covering the window") {
    const auto act = build_activity({utt("A", 0, 1.6), utt("B", 5, 6)}, {0, 1.6}, 0.016, 0);
    REQUIRE(act.frames() == 100);
    CHECK(act.active.row(act.index_of("A")).all());
    CHECK_FALSE(act.active.row(act.index_of("B")).any());
  }
  SUBCASE("any-overlap rule against a brute-force check") {
    const auto act = build_activity({utt("A", 1.0, 2.0)}, {0, 3.0}, 0.016, 0);
    Eigen::Index count = 0;
    for (Eigen::Index t = 0; t < act.frames(); ++t) {
      CHECK(act.active(0, t) == frame_overlaps(act, t, 1.0, 2.0));
      count += act.active(0, t);
    }
    CHECK(count >= 63);
    CHECK(act.active(0, 62));  // 0.992 - 1.008
    CHECK_FALSE(act.active(0, 61));
    CHECK_FALSE(act.active(0, 126));
  }
  SUBCASE("frame offset and window clipping") {
    const auto act = build_activity({utt("A", 1.0, 2.0), utt("B", 0.2, 0.5)}, {0.9, 1.5}, 0.016, 0.9);
    for (Eigen::Index t = 0; t < act.frames(); ++t) {
      CHECK(act.active(0, t) == frame_overlaps(act, t, 1.0, 1.5));
      CHECK_FALSE(act.active(1, t));
    }
  }
  SUBCASE("explicit frame count") {
    const auto act = build_activity({utt("A", 0.5, 0.7)}, {0, 1}, 0.1, 0, 20);
    CHECK(act.frames() == 20);
  }
  SUBCASE("no annotations") {
    const auto act = build_activity({}, {0, 1}, 0.016, 0);
    CHECK(act.active.rows() >= 1);
    CHECK_FALSE(act.active.any());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_activity({}, {1, 1}, 0.016, 0), Error);
    CHECK_THROWS_AS(build_activity({}, {0, 1}, 0.0, 0), ConfigError);
  }
}

TEST_CASE("active speaker count never exceeds distinct speakers") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<UtteranceAnnotation> anns;
  const std::vector<std::string> names = {"A", "B", "C"};
  for (int i = 0; i < 30; ++i) {
    const double s = u(rng);
    anns.push_back(utt(names[static_cast<std::size_t>(i % 3)], s, s + 0.1 + u(rng) / 5));
  }
  const auto act = build_activity(anns, {0, 12}, 0.016, 0);
  CHECK(act.active.rows() == 3);
  for (Eigen::Index t = 0; t < act.frames(); ++t) CHECK(act.active.col(t).count() <= 3);
}

TEST_CASE("refine_with_alignment") {
  const auto act = build_activity({utt("A", 1.0, 2.0), utt("B", 0.5, 1.5)}, {0, 3}, 0.016, 0);

  SUBCASE("leading silence is removed") {
    const auto out = refine_with_alignment(act, {{"A", {{1.2, 2.0}}}});
    for (Eigen::Index t = 0; t < act.frames(); ++t) {
      const bool expected = act.active(0, t) && frame_overlaps(act, t, 1.2, 2.0);
      CHECK(out.active(0, t) == expected);
      if (frame_overlaps(act, t, 1.0, 1.2) && !frame_overlaps(act, t, 1.2, 2.0))
        CHECK_FALSE(out.active(0, t));
    }
    CHECK(out.active.row(1) == act.active.row(1));
  }
  SUBCASE("empty track silences the speaker") {
    const auto out = refine_with_alignment(act, {{"B", {}}});
    CHECK_FALSE(out.active.row(1).any());
    CHECK(out.active.row(0) == act.active.row(0));
  }
  SUBCASE("covering track is the identity") {
    const auto out = refine_with_alignment(act, {{"A", {{0.0, 3.0}}}, {"B", {{0.4, 1.6}}}});
    CHECK(out.active == act.active);
  }
  SUBCASE("unknown speaker") {
    CHECK_THROWS_AS(refine_with_alignment(act, {{"Z", {{0, 1}}}}), Error);
  }
  SUBCASE("unsorted segments") {
    CHECK_THROWS_AS(refine_with_alignment(act, {{"A", {{1.5, 2.0}, {1.0, 1.2}}}}), Error);
  }
}

TEST_CASE("refine_with_alignment is monotone and idempotent") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UtteranceAnnotation> anns;
    for (int i = 0; i < 6; ++i) {
      const double s = 8 * u(rng);
      anns.push_back(utt(i % 2 ? "A" : "B", s, s + 0.2 + 2 * u(rng)));
    }
    const auto act = build_activity(anns, {0, 11}, 0.016, 0);
    std::vector<AlignmentTrack> tracks;
    for (const char* spk : {"A", "B"}) {
      AlignmentTrack tr{spk, {}};
      double cursor = 0;
      while (cursor < 10) {
        const double s = cursor + u(rng);
        const double e = s + u(rng) + 0.01;
        tr.speech_segments.emplace_back(s, e);
        cursor = e + 0.01;
      }
      tracks.push_back(tr);
    }
    const auto once = refine_with_alignment(act, tracks);
    const auto twice = refine_with_alignment(once, tracks);
    CHECK(twice.active == once.active);
    for (Eigen::Index i = 0; i < act.active.size(); ++i)
      if (once.active.data()[i]) CHECK(act.active.data()[i]);
  }
}

TEST_CASE("drop_silent_speakers and frames_overlapping") {
  auto act = build_activity({utt("A", 1, 2), utt("B", 4, 5), utt("C", 0.2, 0.4)}, {0.9, 3}, 0.1, 0.9);
  const auto kept = drop_silent_speakers(act);
  CHECK(kept.speakers == std::vector<std::string>{"A"});
  CHECK(kept.active.row(0) == act.active.row(0));

  const auto sel = frames_overlapping(act, 1.05, 1.25);
  // frames cover [0.9, 1.0), [1.0, 1.1), ...
  CHECK_FALSE(sel[0]);
  CHECK(sel[1]);
  CHECK(sel[2]);
  CHECK(sel[3]);
  CHECK_FALSE(sel[4]);
}
