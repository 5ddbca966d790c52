#include "gss/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "gss/config_io.hpp"
#include "gss/wav.hpp"
#include "json.hpp"

namespace gss {

namespace {

constexpr double kSpeedOfSound = 343.0;
constexpr double kRoomWidth = 7.0;
constexpr double kRoomDepth = 5.5;
// Linear four-microphone layout (metres along the array axis), as on
// commodity depth-camera arrays; other channel counts use uniform spacing.
constexpr double kFourMicOffsets[4] = {-0.113, 0.036, 0.076, 0.113};
constexpr double kMicSpacing = 0.06;
// Radii (metres from the table centre) of the array ring and the seats.
constexpr double kArrayRing[2] = {1.6, 2.2};
constexpr double kSeatRing[2] = {0.7, 1.0};
constexpr double kHighPassHz = 120.0;
constexpr int kFractionalDelayHalfWidth = 16;

// mt19937_64 output is fixed by the standard; the distributions below are
// written out so that scenes do not depend on the standard library's
// distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int n) { return static_cast<int>(uniform() * n) % n; }
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return Rng(splitmix(splitmix(seed ^ (tag << 32)) + index));
}

enum StreamTag : std::uint64_t { kGeometry = 1, kSchedule, kSource, kTail, kNoise };

struct Point {
  double x = 0, y = 0;
};

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Pink-ish noise via Kellet's economy filter on white Gaussian samples.
RealVector pink_noise(Rng& rng, Eigen::Index n) {
  RealVector out(n);
  double b0 = 0, b1 = 0, b2 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double white = rng.gaussian();
    b0 = 0.99765 * b0 + white * 0.0990460;
    b1 = 0.96300 * b1 + white * 0.2965164;
    b2 = 0.57000 * b2 + white * 1.0526913;
    out(i) = b0 + b1 + b2 + white * 0.1848;
  }
  return out;
}

// Linear convolution truncated to the length of `signal`.
RealVector fft_convolve(const RealVector& signal, const RealVector& ir) {
  const Eigen::Index n = signal.size();
  Eigen::Index size = 1;
  while (size < n + ir.size() - 1) size <<= 1;
  Eigen::FFT<Real> fft;
  std::vector<Real> a(size, 0.0), b(size, 0.0), out(size);
  std::copy(signal.data(), signal.data() + n, a.begin());
  std::copy(ir.data(), ir.data() + ir.size(), b.begin());
  std::vector<Complex> fa(size), fb(size);
  fft.fwd(fa.data(), a.data(), size);
  fft.fwd(fb.data(), b.data(), size);
  for (Eigen::Index i = 0; i < size; ++i) fa[i] *= fb[i];
  fft.inv(out.data(), fa.data(), size);
  return Eigen::Map<RealVector>(out.data(), n);
}

// Adds gain * signal delayed by `delay` samples (fractional) to `out`, using a
// Hann-windowed sinc interpolator.
void add_delayed(const RealVector& signal, double delay, double gain, Eigen::Ref<RealVector> out) {
  const auto whole = static_cast<Eigen::Index>(std::floor(delay));
  const double frac = delay - static_cast<double>(whole);
  const int half = kFractionalDelayHalfWidth;
  RealVector taps(2 * half + 1);
  for (int j = -half; j <= half; ++j) {
    const double x = j - frac;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * x / (half + 1));
    taps(j + half) = gain * sinc * window;
  }
  const Eigen::Index n = out.size();
  for (int j = -half; j <= half; ++j) {
    const Eigen::Index shift = whole + j;
    const double h = taps(j + half);
    const Eigen::Index begin = std::max<Eigen::Index>(0, shift);
    const Eigen::Index end = std::min<Eigen::Index>(n, signal.size() + shift);
    if (end > begin) out.segment(begin, end - begin) += h * signal.segment(begin - shift, end - begin);
  }
}

// Turn-taking schedule whose overlap tracks the requested ratio.
std::vector<UtteranceAnnotation> draw_schedule(const SceneConfig& cfg,
                                               const std::vector<std::string>& speakers) {
  Rng rng = stream(cfg.seed, kSchedule);
  std::vector<UtteranceAnnotation> out;
  const double lead = 0.5;
  const double tail = 0.5;
  double active = 0, overlapped = 0;
  double prev_end = lead, prev_duration = 0, prev_overlap = 0;
  int prev_speaker = -1;
  for (int index = 0;; ++index) {
    const double dur = rng.uniform(1.5, 5.0);
    int speaker = 0;
    if (cfg.speakers > 1) {
      if (prev_speaker < 0) {
        speaker = rng.integer(cfg.speakers);
      } else {
        speaker = rng.integer(cfg.speakers - 1);
        if (speaker >= prev_speaker) ++speaker;
      }
    }
    double start;
    double overlap = 0;
    if (prev_speaker < 0) {
      start = lead + rng.uniform(0.0, 0.5);
    } else {
      const double r = cfg.overlap_ratio;
      const double wanted = (r * (active + dur) - overlapped) / (1.0 + r);
      const double limit = 0.9 * std::min(prev_duration - prev_overlap, dur);
      overlap = std::clamp(wanted, 0.0, std::max(0.0, limit));
      if (cfg.speakers < 2 || overlap < 0.05) overlap = 0;
      start = overlap > 0 ? prev_end - overlap : prev_end + rng.uniform(0.1, 0.6);
    }
    const double end = start + dur;
    if (end > cfg.duration - tail) break;
    char id[32];
    std::snprintf(id, sizeof id, "%s_u%03d", speakers[static_cast<std::size_t>(speaker)].c_str(), index);
    out.push_back({id, speakers[static_cast<std::size_t>(speaker)], start, end});
    active += dur - overlap;
    overlapped += overlap;
    prev_end = end;
    prev_duration = dur;
    prev_overlap = overlap;
    prev_speaker = speaker;
  }
  return out;
}

RealVector speech_like_source(const SceneConfig& cfg, int speaker,
                              const std::vector<UtteranceAnnotation>& schedule,
                              const std::string& speaker_id, Eigen::Index length) {
  Rng rng = stream(cfg.seed, kSource, static_cast<std::uint64_t>(speaker));
  RealVector excitation = pink_noise(rng, length);
  // Per-speaker spectral tilt (one-pole low-pass mixed with the raw
  // excitation), then a second-order high-pass: speech carries little energy
  // below ~100 Hz.
  const double pole = rng.uniform(0.2, 0.8);
  const double dry = rng.uniform(0.3, 0.7);
  const double hp = std::exp(-2.0 * std::numbers::pi * kHighPassHz / cfg.sample_rate);
  double state = 0, x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  for (Eigen::Index i = 0; i < length; ++i) {
    state = pole * state + (1.0 - pole) * excitation(i);
    const double tilted = dry * excitation(i) + (1.0 - dry) * state;
    const double stage1 = hp * (y1 + tilted - x1);
    x1 = tilted;
    y1 = stage1;
    const double stage2 = hp * (y2 + stage1 - x2);
    x2 = stage1;
    y2 = stage2;
    excitation(i) = stage2;
  }

  RealVector out = RealVector::Zero(length);
  const double fs = cfg.sample_rate;
  const double ramp = 0.01 * fs;
  for (const auto& u : schedule) {
    if (u.speaker_id != speaker_id) continue;
    const auto s0 = static_cast<Eigen::Index>(std::llround(u.start * fs));
    const auto s1 = std::min<Eigen::Index>(length, static_cast<Eigen::Index>(std::llround(u.end * fs)));
    const double rate = rng.uniform(2.0, 8.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index i = s0; i < s1; ++i) {
      const double t = static_cast<double>(i - s0) / fs;
      const double syllable = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * rate * t + phase);
      double env = 0.02 + 0.98 * syllable * syllable;
      env *= std::min({1.0, (i - s0) / ramp, (s1 - 1 - i) / ramp});
      out(i) = env * excitation(i);
    }
  }
  return out;
}

RealVector wav_source(const SceneConfig& cfg, int speaker,
                      const std::vector<UtteranceAnnotation>& schedule,
                      const std::string& speaker_id, Eigen::Index length) {
  const WaveformSegment file = wav::read(cfg.wav_files[static_cast<std::size_t>(speaker)]);
  if (file.sample_rate != cfg.sample_rate)
    throw ConfigError("source_kind", "wav file sample rate differs from scene sample_rate");
  if (file.length() == 0) throw ConfigError("source_kind", "empty wav file");
  RealVector out = RealVector::Zero(length);
  Eigen::Index cursor = 0;
  const double fs = cfg.sample_rate;
  for (const auto& u : schedule) {
    if (u.speaker_id != speaker_id) continue;
    const auto s0 = static_cast<Eigen::Index>(std::llround(u.start * fs));
    const auto s1 = std::min<Eigen::Index>(length, static_cast<Eigen::Index>(std::llround(u.end * fs)));
    for (Eigen::Index i = s0; i < s1; ++i) {
      out(i) = file.samples(0, cursor);
      cursor = (cursor + 1) % file.length();
    }
  }
  return out;
}

}  // namespace

void validate(const SceneConfig& cfg) {
  if (cfg.speakers < 1) throw ConfigError("speakers", "must be >= 1");
  if (cfg.arrays < 1) throw ConfigError("arrays", "must be >= 1");
  if (cfg.channels_per_array < 1) throw ConfigError("channels_per_array", "must be >= 1");
  if (!(cfg.duration > 0)) throw ConfigError("duration", "must be positive");
  if (cfg.sample_rate <= 0) throw ConfigError("sample_rate", "must be positive");
  if (!(cfg.overlap_ratio >= 0 && cfg.overlap_ratio < 1))
    throw ConfigError("overlap_ratio", "must lie in [0, 1)");
  if (cfg.speakers == 1 && cfg.overlap_ratio > 0)
    throw ConfigError("overlap_ratio", "a single speaker cannot overlap");
  if (!cfg.array_clock_offset_ms.empty() &&
      static_cast<int>(cfg.array_clock_offset_ms.size()) != cfg.arrays)
    throw ConfigError("array_clock_offset_ms", "needs one entry per array");
  if (cfg.reverb.enabled && !(cfg.reverb.decay_seconds > 0))
    throw ConfigError("reverb", "decay_seconds must be positive");
  if (cfg.source_kind == SourceKind::WavFiles &&
      static_cast<int>(cfg.wav_files.size()) != cfg.speakers)
    throw ConfigError("source_kind", "needs one wav file per speaker");
}

StftConfig scene_stft() { return StftConfig{}; }

double overlap_fraction(const ActivityPattern& act) {
  Eigen::Index any = 0, multi = 0;
  for (Eigen::Index t = 0; t < act.frames(); ++t) {
    const auto n = act.active.col(t).count();
    any += n >= 1 ? 1 : 0;
    multi += n >= 2 ? 1 : 0;
  }
  return any == 0 ? 0.0 : static_cast<double>(multi) / static_cast<double>(any);
}

MaskSet compute_oracle_masks(const std::vector<std::string>& speakers,
                             const std::vector<RealVector>& images, const RealVector& noise,
                             const StftConfig& cfg, int sample_rate) {
  auto power = [&](const RealVector& x) {
    WaveformSegment w;
    w.sample_rate = sample_rate;
    w.samples = x.transpose();
    const MultiChannelSpectrogram s = stft(w, cfg);
    RealMatrix p(s.frames(), s.frequencies());
    for (Eigen::Index f = 0; f < s.frequencies(); ++f) p.col(f) = s.bin(f).row(0).cwiseAbs2().transpose();
    return p;
  };
  MaskSet masks;
  masks.classes = speakers;
  masks.classes.push_back(kNoiseClass);
  for (const auto& img : images) masks.gamma.push_back(power(img));
  masks.gamma.push_back(power(noise));
  RealMatrix total = RealMatrix::Zero(masks.frames(), masks.frequencies());
  for (const auto& g : masks.gamma) total += g;
  for (Eigen::Index t = 0; t < total.rows(); ++t)
    for (Eigen::Index f = 0; f < total.cols(); ++f) {
      if (total(t, f) > 0) {
        for (auto& g : masks.gamma) g(t, f) /= total(t, f);
      } else {
        for (auto& g : masks.gamma) g(t, f) = 0;
        masks.gamma.back()(t, f) = 1;
      }
    }
  return masks;
}

SceneGroundTruth generate_scene(const SceneConfig& cfg) {
  validate(cfg);
  SceneGroundTruth gt;
  gt.config = cfg;
  for (int s = 0; s < cfg.speakers; ++s) {
    char id[16];
    std::snprintf(id, sizeof id, "P%02d", s + 1);
    gt.speakers.emplace_back(id);
  }
  const auto length = static_cast<Eigen::Index>(std::llround(cfg.duration * cfg.sample_rate));
  const double fs = cfg.sample_rate;

  // Geometry: arrays on a jittered ring around the table, speakers seated
  // around it, all at least 0.5 m from any array.
  Rng geo = stream(cfg.seed, kGeometry);
  const Point table{0.5 * kRoomWidth, 0.5 * kRoomDepth};
  const double ring_phase = geo.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Point> array_centre(static_cast<std::size_t>(cfg.arrays));
  std::vector<double> array_angle(static_cast<std::size_t>(cfg.arrays));
  for (int a = 0; a < cfg.arrays; ++a) {
    const double phi = ring_phase + 2.0 * std::numbers::pi * (a + geo.uniform(-0.25, 0.25)) / cfg.arrays;
    const double r = geo.uniform(kArrayRing[0], kArrayRing[1]);
    array_centre[a] = {table.x + r * std::cos(phi), table.y + r * std::sin(phi)};
    array_angle[a] = geo.uniform(0.0, std::numbers::pi);
  }
  std::vector<Point> speaker_pos;
  for (int s = 0; s < cfg.speakers; ++s) {
    Point p;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double phi = geo.uniform(0.0, 2.0 * std::numbers::pi);
      const double r = geo.uniform(kSeatRing[0], kSeatRing[1]);
      p = {table.x + r * std::cos(phi), table.y + r * std::sin(phi)};
      bool ok = true;
      for (const auto& c : array_centre) ok = ok && distance(p, c) >= 0.5;
      for (const auto& q : speaker_pos) ok = ok && distance(p, q) >= 1.0;
      if (ok) break;
    }
    speaker_pos.push_back(p);
  }
  auto mic_position = [&](int a, int m) {
    const double offset = cfg.channels_per_array == 4
                              ? kFourMicOffsets[m]
                              : (m - 0.5 * (cfg.channels_per_array - 1)) * kMicSpacing;
    return Point{array_centre[a].x + offset * std::cos(array_angle[a]),
                 array_centre[a].y + offset * std::sin(array_angle[a])};
  };

  gt.utterances = draw_schedule(cfg, gt.speakers);

  std::vector<RealVector> sources;
  for (int s = 0; s < cfg.speakers; ++s) {
    RealVector src = cfg.source_kind == SourceKind::WavFiles
                         ? wav_source(cfg, s, gt.utterances, gt.speakers[s], length)
                         : speech_like_source(cfg, s, gt.utterances, gt.speakers[s], length);
    const double energy = src.squaredNorm();
    if (energy > 0) {
      Eigen::Index active = 0;
      for (Eigen::Index i = 0; i < length; ++i) active += src(i) != 0 ? 1 : 0;
      src *= 1.0 / std::sqrt(energy / static_cast<double>(active));
    }
    sources.push_back(std::move(src));
  }

  gt.clean_images.assign(static_cast<std::size_t>(cfg.speakers), {});
  if (cfg.reverb.enabled) gt.direct_images.assign(static_cast<std::size_t>(cfg.speakers), {});
  for (int s = 0; s < cfg.speakers; ++s) {
    for (int a = 0; a < cfg.arrays; ++a) {
      const double clock =
          cfg.array_clock_offset_ms.empty() ? 0.0 : cfg.array_clock_offset_ms[a] * 1e-3 * fs;
      WaveformSegment image;
      image.sample_rate = cfg.sample_rate;
      image.samples = RealMatrix::Zero(cfg.channels_per_array, length);
      WaveformSegment direct = image;
      for (int m = 0; m < cfg.channels_per_array; ++m) {
        const double d = distance(speaker_pos[s], mic_position(a, m));
        const double delay = d / kSpeedOfSound * fs + clock;
        const double gain = 1.0 / std::max(d, 0.1);
        RealVector channel = RealVector::Zero(length);
        add_delayed(sources[s], delay, gain, channel);
        if (cfg.reverb.enabled) {
          direct.samples.row(m) = channel.transpose();
          Rng tail_rng = stream(cfg.seed, kTail,
                                (static_cast<std::uint64_t>(s) << 20) |
                                    (static_cast<std::uint64_t>(a) << 8) | static_cast<std::uint64_t>(m));
          const auto tail_len = static_cast<Eigen::Index>(std::ceil(cfg.reverb.decay_seconds * fs));
          const auto onset = static_cast<Eigen::Index>(std::ceil(delay)) + 40;
          RealVector ir = RealVector::Zero(onset + tail_len);
          const double rate = std::log(1000.0) / tail_len;  // 60 dB over the tail
          for (Eigen::Index i = 0; i < tail_len; ++i)
            ir(onset + i) = tail_rng.gaussian() * std::exp(-rate * static_cast<double>(i));
          const double tail_energy = gain * gain * std::pow(10.0, -cfg.reverb.direct_to_tail_db / 10.0);
          ir *= std::sqrt(tail_energy / ir.squaredNorm());
          channel += fft_convolve(sources[s], ir);
        }
        image.samples.row(m) = channel.transpose();
      }
      gt.clean_images[s].push_back(std::move(image));
      if (cfg.reverb.enabled) gt.direct_images[s].push_back(std::move(direct));
    }
  }

  // Spatially white pink noise, level set against the speech power at the
  // reference channel.
  RealVector reference_speech = RealVector::Zero(length);
  for (int s = 0; s < cfg.speakers; ++s) reference_speech += gt.clean_images[s][0].samples.row(0).transpose();
  const double speech_power = reference_speech.squaredNorm() / static_cast<double>(length);
  const double noise_power = speech_power * std::pow(10.0, -cfg.noise_snr_db / 10.0);
  for (int a = 0; a < cfg.arrays; ++a) {
    WaveformSegment noise;
    noise.sample_rate = cfg.sample_rate;
    noise.samples.resize(cfg.channels_per_array, length);
    for (int m = 0; m < cfg.channels_per_array; ++m) {
      Rng rng = stream(cfg.seed, kNoise, (static_cast<std::uint64_t>(a) << 8) | static_cast<std::uint64_t>(m));
      RealVector n = pink_noise(rng, length);
      const double p = n.squaredNorm() / static_cast<double>(length);
      if (p > 0) n *= std::sqrt(noise_power / p);
      noise.samples.row(m) = n.transpose();
    }
    WaveformSegment mixture = noise;
    for (int s = 0; s < cfg.speakers; ++s) mixture.samples += gt.clean_images[s][a].samples;
    gt.noise.push_back(std::move(noise));
    gt.mixtures.push_back(std::move(mixture));
  }

  const StftConfig stft_cfg = scene_stft();
  const Eigen::Index frames = frame_count(stft_cfg, length);
  gt.activity = build_activity(gt.utterances, {0.0, cfg.duration},
                               static_cast<double>(stft_cfg.shift) / fs,
                               frame_offset_seconds(stft_cfg, cfg.sample_rate), frames);
  // Keep speaker rows in canonical order even if some never speak.
  {
    ActivityPattern ordered = gt.activity;
    ordered.speakers = gt.speakers;
    ordered.active = BoolMatrix::Constant(cfg.speakers, frames, false);
    for (int s = 0; s < cfg.speakers; ++s) {
      const Eigen::Index row = gt.activity.index_of(gt.speakers[s]);
      if (row >= 0) ordered.active.row(s) = gt.activity.active.row(row);
    }
    gt.activity = std::move(ordered);
  }

  std::vector<RealVector> ref_images;
  for (int s = 0; s < cfg.speakers; ++s) ref_images.push_back(gt.clean_images[s][0].samples.row(0).transpose());
  gt.oracle_masks = compute_oracle_masks(gt.speakers, ref_images,
                                         gt.noise[0].samples.row(0).transpose(), stft_cfg,
                                         cfg.sample_rate);
  gt.oracle_alignment = oracle_alignment(gt);
  return gt;
}

std::vector<AlignmentTrack> oracle_alignment(const SceneGroundTruth& gt, double energy_floor_db) {
  const StftConfig stft_cfg = scene_stft();
  const int hop = stft_cfg.shift;
  const int fs = gt.config.sample_rate;
  std::vector<AlignmentTrack> tracks;
  for (std::size_t s = 0; s < gt.speakers.size(); ++s) {
    AlignmentTrack track;
    track.speaker_id = gt.speakers[s];
    const auto& image = gt.clean_images[s][0].samples;
    const Eigen::Index frames = image.cols() / hop;
    RealVector energy(frames);
    for (Eigen::Index t = 0; t < frames; ++t) energy(t) = image.row(0).segment(t * hop, hop).squaredNorm();
    const double peak = frames > 0 ? energy.maxCoeff() : 0.0;
    if (peak > 0) {
      const double threshold = peak * std::pow(10.0, -energy_floor_db / 10.0);
      Eigen::Index t = 0;
      while (t < frames) {
        if (energy(t) <= threshold) {
          ++t;
          continue;
        }
        Eigen::Index end = t;
        while (end < frames && energy(end) > threshold) ++end;
        track.speech_segments.emplace_back(static_cast<double>(t * hop) / fs,
                                           static_cast<double>(end * hop) / fs);
        t = end;
      }
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

void save_scene(const SceneGroundTruth& gt, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  std::vector<std::string> files;
  auto add = [&](const std::string& rel) {
    files.push_back(rel);
    return (fs::path(dir) / rel).string();
  };
  for (std::size_t a = 0; a < gt.mixtures.size(); ++a) {
    wav::write(add("mix_array" + std::to_string(a) + ".wav"), gt.mixtures[a]);
    wav::write(add("noise_array" + std::to_string(a) + ".wav"), gt.noise[a]);
  }
  for (std::size_t s = 0; s < gt.speakers.size(); ++s)
    for (std::size_t a = 0; a < gt.clean_images[s].size(); ++a)
      wav::write(add("images/" + gt.speakers[s] + "_array" + std::to_string(a) + ".wav"),
                 gt.clean_images[s][a]);
  io::write_annotations(add("annotations.json"), gt.utterances);
  io::write_alignment(add("alignment.json"), gt.oracle_alignment);
  io::write_text(add("scene_config.json"), io::format_scene_config(gt.config));
  write_masks(add("oracle_masks.gssmask"), gt.oracle_masks);
  files.push_back("oracle_masks.gssmask.classes.txt");

  nlohmann::json manifest;
  manifest["speakers"] = gt.speakers;
  manifest["arrays"] = gt.mixtures.size();
  manifest["sample_rate"] = gt.config.sample_rate;
  manifest["duration"] = gt.config.duration;
  nlohmann::json checksums = nlohmann::json::object();
  std::uint64_t combined = 0xcbf29ce484222325ULL;
  for (const auto& rel : files) {
    const std::uint64_t h = file_checksum((fs::path(dir) / rel).string());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    checksums[rel] = hex;
    combined = splitmix(combined ^ h);
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(combined));
  manifest["files"] = checksums;
  manifest["checksum"] = hex;
  io::write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

SceneGroundTruth load_scene(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto path = [&](const std::string& rel) { return (fs::path(dir) / rel).string(); };
  const auto manifest = nlohmann::json::parse(io::read_text(path("manifest.json")));
  SceneGroundTruth gt;
  gt.config = io::read_scene_config(path("scene_config.json"));
  gt.speakers = manifest.at("speakers").get<std::vector<std::string>>();
  const auto arrays = manifest.at("arrays").get<std::size_t>();
  for (std::size_t a = 0; a < arrays; ++a) {
    gt.mixtures.push_back(wav::read(path("mix_array" + std::to_string(a) + ".wav")));
    gt.noise.push_back(wav::read(path("noise_array" + std::to_string(a) + ".wav")));
  }
  gt.clean_images.resize(gt.speakers.size());
  for (std::size_t s = 0; s < gt.speakers.size(); ++s)
    for (std::size_t a = 0; a < arrays; ++a)
      gt.clean_images[s].push_back(
          wav::read(path("images/" + gt.speakers[s] + "_array" + std::to_string(a) + ".wav")));
  gt.utterances = io::read_annotations(path("annotations.json"));
  gt.oracle_alignment = io::read_alignment(path("alignment.json"));
  gt.oracle_masks = read_masks(path("oracle_masks.gssmask"));

  const StftConfig stft_cfg = scene_stft();
  const Eigen::Index length = gt.mixtures.front().length();
  ActivityPattern act = build_activity(
      gt.utterances, {0.0, static_cast<double>(length) / gt.config.sample_rate},
      static_cast<double>(stft_cfg.shift) / gt.config.sample_rate,
      frame_offset_seconds(stft_cfg, gt.config.sample_rate), frame_count(stft_cfg, length));
  gt.activity.speakers = gt.speakers;
  gt.activity.frame_shift = act.frame_shift;
  gt.activity.frame_offset = act.frame_offset;
  gt.activity.active = BoolMatrix::Constant(static_cast<Eigen::Index>(gt.speakers.size()), act.frames(), false);
  for (std::size_t s = 0; s < gt.speakers.size(); ++s) {
    const Eigen::Index row = act.index_of(gt.speakers[s]);
    if (row >= 0) gt.activity.active.row(static_cast<Eigen::Index>(s)) = act.active.row(row);
  }
  return gt;
}

}  // namespace gss
