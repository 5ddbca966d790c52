#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "gss/cacgmm.hpp"
#include "gss/config_io.hpp"
#include "gss/pipeline.hpp"
#include "gss/wav.hpp"
#include "test_util.hpp"

using namespace gss;

namespace {

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

// Hand-built WAVE_FORMAT_EXTENSIBLE file with float samples.
std::string extensible_float_wav(const std::vector<float>& interleaved, std::uint16_t channels) {
  std::string fmt;
  put<std::uint16_t>(fmt, 0xFFFE);
  put<std::uint16_t>(fmt, channels);
  put<std::uint32_t>(fmt, 16000);
  put<std::uint32_t>(fmt, 16000u * 4u * channels);
  put<std::uint16_t>(fmt, static_cast<std::uint16_t>(4 * channels));
  put<std::uint16_t>(fmt, 32);
  put<std::uint16_t>(fmt, 22);
  put<std::uint16_t>(fmt, 32);
  put<std::uint32_t>(fmt, 0);
  put<std::uint16_t>(fmt, 3);  // IEEE float subformat GUID prefix
  fmt.append("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  std::string data;
  for (float v : interleaved) put<float>(data, v);

  std::string out = "RIFF";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + data.size()));
  out += "WAVEfmt ";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fmt.size()));
  out += fmt;
  out += "data";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
  out += data;
  return out;
}

}  // namespace

TEST_CASE("wav round trips") {
  const auto dir = test::temp_dir("wav");
  RealMatrix x = 0.3 * test::random_signal(3, 1000, 1);
  x = x.cwiseMax(-0.99).cwiseMin(0.99);
  const auto seg = test::segment(x, 16000);

  SUBCASE("float32") {
    const auto path = (dir / "f.wav").string();
    wav::write(path, seg);
    const auto back = wav::read(path);
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.channels() == 3);
    CHECK((back.samples - x).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("pcm16") {
    const auto path = (dir / "p.wav").string();
    wav::write(path, seg, wav::SampleFormat::Pcm16);
    const auto back = wav::read(path);
    REQUIRE(back.length() == 1000);
    CHECK((back.samples - x).cwiseAbs().maxCoeff() < 1.0 / 32768 + 1e-12);
  }
  SUBCASE("extensible float header") {
    const auto path = (dir / "e.wav").string();
    std::ofstream(path, std::ios::binary) << extensible_float_wav({0.5f, -0.25f, 0.125f, 1.0f}, 2);
    const auto back = wav::read(path);
    REQUIRE(back.channels() == 2);
    REQUIRE(back.length() == 2);
    CHECK(back.samples(0, 0) == 0.5);
    CHECK(back.samples(1, 0) == -0.25);
    CHECK(back.samples(1, 1) == 1.0);
  }
  SUBCASE("multi-file arrays") {
    wav::write((dir / "a.wav").string(), test::segment(x.topRows(1)));
    wav::write((dir / "b.wav").string(), test::segment(x.bottomRows(2)));
    const auto arr = wav::read_array({(dir / "a.wav").string(), (dir / "b.wav").string()});
    CHECK(arr.channels() == 3);
    CHECK((arr.samples - x).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("bad files") {
    CHECK_THROWS_AS(wav::read((dir / "missing.wav").string()), Error);
    std::ofstream((dir / "junk.wav").string(), std::ios::binary) << "not a wave file at all";
    CHECK_THROWS_AS(wav::read((dir / "junk.wav").string()), Error);
  }
}

TEST_CASE("annotation and alignment documents") {
  const std::string text = R"([
    {"utterance_id": "u1", "speaker_id": "P01", "start": 1.5, "end": 3.25},
    {"utterance_id": "u2", "speaker_id": "P02", "start": 2.0, "end": 4.0}
  ])";
  const auto anns = io::parse_annotations(text);
  REQUIRE(anns.size() == 2);
  CHECK(anns[0].speaker_id == "P01");
  CHECK(anns[0].end == 3.25);
  const auto again = io::parse_annotations(io::format_annotations(anns));
  CHECK(again[1].utterance_id == "u2");
  CHECK(again[1].start == 2.0);

  CHECK_THROWS_AS(io::parse_annotations(R"([{"utterance_id": "u1", "speaker_id": "P01", "start": 1}])"),
                  Error);
  CHECK_THROWS_AS(io::parse_annotations(R"([{"utterance_id": "u1", "speaker_id": "P01", "start": 3, "end": 1}])"),
                  Error);
  CHECK_THROWS_AS(io::parse_annotations("{not json"), Error);

  const auto tracks = io::parse_alignment(
      R"([{"speaker_id": "P01", "speech_segments": [[1.0, 2.0], [2.5, 3.0]]}, {"speaker_id": "P02", "speech_segments": []}])");
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].speech_segments[1] == std::pair{2.5, 3.0});
  CHECK(tracks[1].speech_segments.empty());
  CHECK(io::parse_alignment(io::format_alignment(tracks))[0].speech_segments.size() == 2);
  CHECK_THROWS_AS(io::parse_alignment(R"([{"speaker_id": "P01", "speech_segments": [[1.0]]}])"), Error);
}

TEST_CASE("scene config documents") {
  const auto cfg = io::parse_scene_config(
      R"({"seed": 7, "speakers": 2, "arrays": 3, "reverb": {"tail": {"decay_seconds": 0.4, "direct_to_tail_db": 3}}})");
  CHECK(cfg.seed == 7);
  CHECK(cfg.arrays == 3);
  CHECK(cfg.channels_per_array == 4);
  CHECK(cfg.reverb.enabled);
  CHECK(cfg.reverb.decay_seconds == 0.4);
  const auto back = io::parse_scene_config(io::format_scene_config(cfg));
  CHECK(back.reverb.direct_to_tail_db == 3.0);
  CHECK(back.speakers == 2);

  auto field_of = [](const std::string& text) {
    try {
      io::parse_scene_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"overlap_ratio": 1.5})") == "overlap_ratio");
  CHECK(field_of(R"({"colour": "blue"})") == "colour");
  CHECK(field_of(R"({"reverb": "lots"})") == "reverb");
  CHECK(field_of(R"({"source_kind": "music"})") == "source_kind");
  CHECK(field_of(R"({"speakers": 2, "source_kind": {"wav_files": ["a.wav"]}})") == "source_kind");
}

TEST_CASE("pipeline config documents") {
  const auto cfg = parse_pipeline_config(
      R"({"wpe": false, "gss": {"iterations": 5}, "context": {"left": 2, "right": 3},
          "bf_context": true, "arrays": [0, 2], "reference_policy": "fixed", "reference_channel": 1})");
  CHECK_FALSE(cfg.wpe.has_value());
  CHECK(cfg.gss.iterations == 5);
  CHECK(cfg.context.right == 3.0);
  CHECK(cfg.bf_context);
  CHECK(cfg.arrays == std::vector<int>{0, 2});
  CHECK(cfg.reference_policy == ReferencePolicy::Fixed);
  const auto back = parse_pipeline_config(format_pipeline_config(cfg));
  CHECK_FALSE(back.wpe.has_value());
  CHECK(back.reference_channel == 1);
  CHECK(back.arrays == cfg.arrays);

  const auto defaults = parse_pipeline_config("{}");
  CHECK(defaults.wpe.has_value());
  CHECK(defaults.wpe->taps == 10);
  CHECK(defaults.context.left == 15.0);
  CHECK_FALSE(defaults.bf_context);

  CHECK_THROWS_AS(parse_pipeline_config(R"({"gss": {"iterations": -1}})"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config(R"({"stft": {"fft_size": 1000}})"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config(R"({"speed": 11})"), ConfigError);
}

TEST_CASE("mask files") {
  const auto dir = test::temp_dir("masks");
  MaskSet m;
  m.classes = {"P01", "P02", kNoiseClass};
  for (int k = 0; k < 3; ++k) m.gamma.push_back(test::random_signal(7, 5, 10 + k).cwiseAbs() / 4.0);
  const auto path = (dir / "m.gssmask").string();
  write_masks(path, m);

  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "GSSMASK1");
  std::uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  CHECK(dims[0] == 3);
  CHECK(dims[1] == 7);
  CHECK(dims[2] == 5);
  float first[2];
  in.read(reinterpret_cast<char*>(first), sizeof first);
  CHECK(first[0] == static_cast<float>(m.gamma[0](0, 0)));
  CHECK(first[1] == static_cast<float>(m.gamma[0](0, 1)));  // frequency-minor
  CHECK(std::filesystem::file_size(path) == 8 + 12 + 4 * 3 * 7 * 5);

  const auto back = read_masks(path);
  CHECK(back.classes == m.classes);
  for (int k = 0; k < 3; ++k) CHECK((back.gamma[k] - m.gamma[k]).cwiseAbs().maxCoeff() < 1e-7);
}
