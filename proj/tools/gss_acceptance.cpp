// gss_acceptance: runs the acceptance criteria and prints one PASS/FAIL line
// per criterion. Exit code 0 iff every selected criterion passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "gss/annotations.hpp"
#include "gss/beamform.hpp"
#include "gss/cacgmm.hpp"
#include "gss/dereverb.hpp"
#include "gss/hypothesis.hpp"
#include "gss/metrics.hpp"
#include "gss/parallel.hpp"
#include "gss/pipeline.hpp"
#include "gss/scene.hpp"

using namespace gss;

namespace {

// Recorded from the first accepted run of criterion 5 (single thread).
constexpr double kSeparationBaselineDb = 9.76;
constexpr double kSeparationTolerance = 0.5;

// Beamformer loading for the multi-array criteria (6 and 7). The default 1e-6
// lets mask errors cancel the target once 12 or 24 channels are stacked.
constexpr double kMultiArrayLoading = 1e-1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

SceneConfig scene_config(std::uint64_t seed, int speakers, int arrays, double duration) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.speakers = speakers;
  cfg.arrays = arrays;
  cfg.duration = duration;
  cfg.overlap_ratio = 0.4;
  return cfg;
}

std::size_t speaker_index(const SceneGroundTruth& gt, const std::string& id) {
  return static_cast<std::size_t>(std::find(gt.speakers.begin(), gt.speakers.end(), id) -
                                  gt.speakers.begin());
}

/// Enhances `targets` guided by `guide` and scores them against the scene.
EvalReport enhance_and_score(const SceneGroundTruth& gt, const PipelineConfig& cfg,
                             const std::vector<UtteranceAnnotation>& guide,
                             const std::vector<UtteranceAnnotation>& targets,
                             const std::vector<AlignmentTrack>* tracks = nullptr) {
  const auto selected = select_arrays(gt.mixtures, cfg);
  std::vector<int> indices = cfg.arrays;
  if (indices.empty())
    for (int a = 0; a < static_cast<int>(gt.mixtures.size()); ++a) indices.push_back(a);
  std::vector<EnhancedUtterance> enhanced;
  for (const auto& u : targets) {
    const auto r = enhance_utterance(selected, guide, u, cfg, tracks);
    enhanced.push_back(to_enhanced(r, indices, cfg.stft.shift, false));
  }
  return evaluate_scene(gt, enhanced);
}

// 1. STFT round trip over random valid configurations.
Outcome stft_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int valid = 0; valid < 100;) {
    StftConfig cfg;
    cfg.fft_size = 1 << std::uniform_int_distribution<int>(6, 11)(rng);
    cfg.shift = cfg.fft_size / (1 << std::uniform_int_distribution<int>(1, 3)(rng));
    cfg.window = rng() % 2 ? WindowType::SqrtHann : WindowType::Hann;
    cfg.pad_mode = rng() % 2 ? PadMode::Zero : PadMode::Reflect;
    try {
      validate(cfg);
    } catch (const ConfigError&) {
      continue;  // not overlap-add consistent
    }
    ++valid;
    const auto channels = std::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
    const auto length = std::uniform_int_distribution<Eigen::Index>(cfg.fft_size, 40000)(rng);
    WaveformSegment x;
    std::normal_distribution<double> n(0, 1);
    x.samples.resize(channels, length);
    for (Eigen::Index i = 0; i < x.samples.size(); ++i) x.samples.data()[i] = n(rng);
    const auto y = istft(stft(x, cfg), length);
    worst = std::max(worst, (y.samples - x.samples).cwiseAbs().maxCoeff() / x.samples.cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-6 && elapsed < 10.0, fmt("max error %.2e of peak, %.1f s", worst, elapsed)};
}

// 2 and 3 share the EM runs: monotone likelihood and exact activity constraints.
struct EmChecks {
  Outcome monotone, constraints;
};

EmChecks em_properties(int seeds) {
  const auto t0 = Clock::now();
  double worst_drop = 0;
  double worst_sum = 0;
  bool inactive_zero = true;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto gt = generate_scene(scene_config(static_cast<std::uint64_t>(100 + seed), 2, 1, 10.0));
    const auto s = stft(gt.mixtures[0], StftConfig{});
    GssConfig cfg;
    cfg.iterations = 20;
    const BoolMatrix admissible = class_activity(gt.activity, cfg.include_noise_class);
    const auto result = run_gss_traced(s, gt.activity, cfg, [&](int, const EmStepResult& step) {
      for (Eigen::Index t = 0; t < step.masks.frames(); ++t)
        for (Eigen::Index f = 0; f < step.masks.frequencies(); ++f) {
          double sum = 0;
          for (Eigen::Index k = 0; k < step.masks.class_count(); ++k) {
            const double g = step.masks.gamma[static_cast<std::size_t>(k)](t, f);
            if (!admissible(t, k) && g != 0.0) inactive_zero = false;
            sum += g;
          }
          worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
    });
    const auto& ll = result.log_likelihoods;
    for (std::size_t i = 1; i < ll.size(); ++i)
      worst_drop = std::max(worst_drop, (ll[i - 1] - ll[i]) / std::abs(ll[i - 1]));
  }
  const double elapsed = seconds_since(t0);
  EmChecks out;
  out.monotone = {worst_drop <= 1e-6 && elapsed < 120.0,
                  fmt("largest relative decrease %.2e over %.0f scenes, %.1f s", worst_drop, seeds, elapsed)};
  out.constraints = {inactive_zero && worst_sum <= 1e-9,
                     std::string(inactive_zero ? "inactive posteriors exactly 0" : "nonzero inactive posterior") +
                         fmt(", max |sum - 1| %.2e", worst_sum)};
  return out;
}

// 4. Closed-form MVDR and BAN cases.
Outcome beamformer_closed_forms() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  StftConfig small;
  small.fft_size = 64;
  small.shift = 16;
  const Eigen::Index d = 4, frames = 50;
  double worst = 0;
  for (Eigen::Index ref = 0; ref < d; ++ref) {
    MultiChannelSpectrogram x(d, frames, small, 16000);
    CovariancePair cov;
    for (Eigen::Index f = 0; f < x.frequencies(); ++f) {
      ComplexVector h(d);
      for (Eigen::Index c = 0; c < d; ++c) h(c) = Complex(n(rng), n(rng));
      cov.target_psd.push_back(h * h.adjoint());
      cov.distortion_psd.push_back(ComplexMatrix::Identity(d, d));
      for (Eigen::Index t = 0; t < frames; ++t) {
        const Complex src(n(rng), n(rng));
        for (Eigen::Index c = 0; c < d; ++c) x(c, t, f) = h(c) * src;
      }
    }
    const auto y = apply_beamformer(mvdr_souden(cov, ref, 0.0), x);
    for (Eigen::Index f = 0; f < x.frequencies(); ++f)
      for (Eigen::Index t = 0; t < frames; ++t)
        worst = std::max(worst, std::abs(y(0, t, f) - x(ref, t, f)) / std::abs(x(ref, t, f)));
  }
  BeamformerWeights e1;
  e1.w = ComplexMatrix::Zero(1, 4);
  e1.w(0, 0) = 1.0;
  const double gain = ban_gain(e1, {ComplexMatrix::Identity(4, 4)})(0);
  return {worst < 1e-5 && std::abs(gain - 0.5) <= 1e-10,
          fmt("MVDR max relative error %.2e, BAN gain %.12f", worst, gain)};
}

// 5. Separation gain of the default full chain on single-array scenes.
Outcome separation_gain(int seeds) {
  const auto t0 = Clock::now();
  std::vector<double> out, best_raw, impr;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto gt = generate_scene(scene_config(static_cast<std::uint64_t>(500 + seed), 2, 1, 15.0));
    const PipelineConfig cfg;
    const auto report = enhance_and_score(gt, cfg, gt.utterances, gt.utterances);
    for (std::size_t i = 0; i < report.utterances.size(); ++i) {
      const auto& u = gt.utterances[i];
      const auto [a, b] = utterance_samples(u, gt.config.sample_rate);
      const auto& clean = gt.clean_images[speaker_index(gt, u.speaker_id)][0].samples;
      double best = -kSiSdrCap;
      for (Eigen::Index c = 0; c < clean.rows(); ++c) {
        const RealVector mix = gt.mixtures[0].samples.row(c).segment(a, b - a).transpose();
        const RealVector ref = clean.row(c).segment(a, b - a).transpose();
        if (ref.squaredNorm() > 0) best = std::max(best, si_sdr(mix, ref));
      }
      out.push_back(report.utterances[i].si_sdr_out);
      best_raw.push_back(best);
      impr.push_back(report.utterances[i].improvement);
    }
  }
  const double elapsed = seconds_since(t0);
  const double m = mean(impr);
  const bool beats_raw = mean(out) > mean(best_raw);
  const bool stable = std::abs(m - kSeparationBaselineDb) <= kSeparationTolerance;
  return {m > 0 && beats_raw && stable && elapsed < 600.0,
          fmt("mean improvement %+.3f dB (baseline %+.2f), output %.2f dB vs best raw channel %.2f dB",
              m, kSeparationBaselineDb, mean(out), mean(best_raw)) +
              fmt(", %.0f utterances, %.0f s", static_cast<double>(impr.size()), elapsed)};
}


// Settings shared by the trend criteria: no dereverberation and a fixed
// reference (array 0, channel 0) so that every variant is scored against the
// same input signal.
PipelineConfig trend_config() {
  PipelineConfig cfg;
  cfg.wpe.reset();
  cfg.reference_policy = ReferencePolicy::Fixed;
  cfg.reference_channel = 0;
  return cfg;
}

// 6. More arrays, better separation. Four talkers outnumber what one array
// can null. The reference channel is chosen by the default max-SNR policy
// among the selected channels, so more arrays also offer a closer reference.
// Every arm is scored against the same input: the unprocessed array 0,
// channel 0 signal.
Outcome array_trend(int seeds) {
  const auto t0 = Clock::now();
  std::vector<double> one, three, six;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto gt = generate_scene(scene_config(static_cast<std::uint64_t>(600 + seed), 4, 6, 12.0));
    const std::size_t mid = gt.utterances.size() / 2;
    const std::vector<UtteranceAnnotation> targets(gt.utterances.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                                                   gt.utterances.begin() + static_cast<std::ptrdiff_t>(mid + 1));
    std::vector<double> input;
    for (const auto& u : targets) {
      const auto [a, b] = utterance_samples(u, gt.config.sample_rate);
      const RealVector mix = gt.mixtures[0].samples.row(0).segment(a, b - a).transpose();
      const RealVector ref =
          gt.clean_images[speaker_index(gt, u.speaker_id)][0].samples.row(0).segment(a, b - a).transpose();
      input.push_back(si_sdr(mix, ref));
    }
    PipelineConfig cfg;
    cfg.wpe.reset();
    cfg.gss.iterations = 10;
    cfg.bf_loading = kMultiArrayLoading;
    for (auto [arrays, sink] : {std::pair{std::vector<int>{0}, &one},
                                std::pair{std::vector<int>{0, 1, 2}, &three},
                                std::pair{std::vector<int>{}, &six}}) {
      cfg.arrays = arrays;
      const auto report = enhance_and_score(gt, cfg, gt.utterances, targets);
      for (std::size_t i = 0; i < targets.size(); ++i)
        sink->push_back(report.utterances[i].si_sdr_out - input[i]);
    }
  }
  const double m1 = mean(one), m3 = mean(three), m6 = mean(six);
  return {m6 >= m3 && m3 >= m1,
          fmt("mean improvement 6 arrays %+.2f dB, 3 arrays %+.2f dB, 1 array %+.2f dB, %.0f s", m6, m3, m1,
              seconds_since(t0))};
}

// True when a speaker other than the target is active inside the context
// window but silent during the utterance itself.
bool interferer_only_in_context(const SceneGroundTruth& gt, const UtteranceAnnotation& target,
                                const ContextConfig& ctx) {
  const auto [w0, w1] = extend_context(target, ctx, gt.config.duration);
  for (const auto& spk : gt.speakers) {
    if (spk == target.speaker_id) continue;
    bool in_context = false, in_utterance = false;
    for (const auto& u : gt.utterances) {
      if (u.speaker_id != spk) continue;
      in_utterance |= u.start < target.end && u.end > target.start;
      in_context |= u.start < w1 && u.end > w0;
    }
    if (in_context && !in_utterance) return true;
  }
  return false;
}

// 7. Beamformer statistics restricted to the utterance.
Outcome context_ablation(int seeds) {
  const auto t0 = Clock::now();
  std::vector<double> with_ctx, without_ctx;
  std::size_t count = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto gt = generate_scene(scene_config(static_cast<std::uint64_t>(700 + seed), 4, 2, 20.0));
    PipelineConfig cfg = trend_config();
    cfg.context = {5.0, 5.0};
    cfg.bf_loading = kMultiArrayLoading;
    std::vector<UtteranceAnnotation> targets;
    for (const auto& u : gt.utterances)
      if (interferer_only_in_context(gt, u, cfg.context)) targets.push_back(u);
    if (targets.empty()) continue;
    count += targets.size();
    cfg.bf_context = true;
    with_ctx.push_back(enhance_and_score(gt, cfg, gt.utterances, targets).mean_improvement);
    cfg.bf_context = false;
    without_ctx.push_back(enhance_and_score(gt, cfg, gt.utterances, targets).mean_improvement);
  }
  const double a = mean(without_ctx), b = mean(with_ctx);
  return {count > 0 && a >= b,
          fmt("without context %+.2f dB, with context %+.2f dB over %.0f utterances, %.0f s", a, b,
              static_cast<double>(count), seconds_since(t0))};
}

// 8. Trimming loose annotations with an oracle alignment.
Outcome alignment_refinement(int seeds) {
  const auto t0 = Clock::now();
  constexpr double kLooseness = 0.5;  // seconds added on both sides of every annotation
  std::vector<double> plain, refined;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto gt = generate_scene(scene_config(static_cast<std::uint64_t>(800 + seed), 2, 1, 15.0));
    std::vector<UtteranceAnnotation> loose = gt.utterances;
    for (auto& u : loose) {
      u.start = std::max(0.0, u.start - kLooseness);
      u.end = std::min(gt.config.duration, u.end + kLooseness);
    }
    const PipelineConfig cfg = trend_config();
    plain.push_back(enhance_and_score(gt, cfg, loose, gt.utterances).mean_improvement);
    refined.push_back(enhance_and_score(gt, cfg, loose, gt.utterances, &gt.oracle_alignment).mean_improvement);
  }
  const double a = mean(refined), b = mean(plain);
  return {a >= b, fmt("refined %+.2f dB, unrefined %+.2f dB, %.0f s", a, b, seconds_since(t0))};
}

// 9. WPE keeps white noise and removes reverberation.
Outcome wpe_sanity(int seeds) {
  const auto t0 = Clock::now();
  const StftConfig stft_cfg;
  double worst_ratio = 1.0;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  // Temporally white: independent frames in the STFT domain, 4 channels x 500 frames.
  for (int seed = 0; seed < seeds; ++seed) {
    MultiChannelSpectrogram x(4, 500, stft_cfg, 16000);
    for (Eigen::Index f = 0; f < x.frequencies(); ++f)
      for (Eigen::Index t = 0; t < x.frames(); ++t)
        for (Eigen::Index c = 0; c < 4; ++c) x(c, t, f) = Complex(n(rng), n(rng));
    const auto y = wpe(x, WpeConfig{});
    double ex = 0, ey = 0;
    for (Eigen::Index f = 0; f < x.frequencies(); ++f) {
      ex += x.bin(f).squaredNorm();
      ey += y.bin(f).squaredNorm();
    }
    const double ratio = ey / ex;
    if (std::abs(ratio - 1.0) > std::abs(worst_ratio - 1.0)) worst_ratio = ratio;
  }
  int improved = 0;
  double min_gain = 1e9;
  for (int seed = 0; seed < seeds; ++seed) {
    SceneConfig sc = scene_config(static_cast<std::uint64_t>(900 + seed), 1, 1, 8.0);
    sc.overlap_ratio = 0.0;
    sc.reverb.enabled = true;
    sc.noise_snr_db = 60.0;
    const auto gt = generate_scene(sc);
    const auto& mix = gt.mixtures[0];
    const auto out = istft(wpe(stft(mix, stft_cfg), WpeConfig{}), mix.length());
    const RealVector direct = gt.direct_images[0][0].samples.row(0).transpose();
    auto dtt = [&](const RealVector& sig) {
      return 10 * std::log10(direct.squaredNorm() / (sig - direct).squaredNorm());
    };
    const double gain = dtt(out.samples.row(0).transpose()) - dtt(mix.samples.row(0).transpose());
    improved += gain > 0;
    min_gain = std::min(min_gain, gain);
  }
  return {std::abs(worst_ratio - 1.0) <= 0.1 && improved == seeds,
          fmt("white-noise energy ratio worst %.4f, direct-to-tail improved on %.0f/%.0f scenes (min %+.2f dB)",
              worst_ratio, improved, seeds, min_gain) +
              fmt(", %.0f s", seconds_since(t0))};
}

// 10. Hypothesis deduplication examples and properties.
Outcome dedup_suite() {
  auto w = [](std::string utt, std::string token, double s, double e, double c) {
    return HypothesisWord{std::move(utt), "spk", std::move(token), s, e, c};
  };
  auto ids = [](const std::vector<HypothesisWord>& v) {
    std::string out;
    for (const auto& x : v) out += x.utterance_id + ":" + x.token + " ";
    return out;
  };
  std::vector<std::string> failures;
  if (ids(deduplicate({w("A", "hello", 1.0, 1.4, 0.9), w("B", "hello", 1.1, 1.5, 0.4)}, 0.5)) != "A:hello ")
    failures.push_back("overlapping duplicate");
  if (deduplicate({w("A", "hello", 1.0, 1.4, 0.9), w("B", "hello", 1.4, 1.8, 0.4)}, 0.5).size() != 2)
    failures.push_back("disjoint duplicate");
  if (ids(deduplicate({w("B", "yes", 2.0, 2.5, 0.6), w("A", "yes", 2.1, 2.6, 0.6)}, 0.5)) != "B:yes ")
    failures.push_back("tie break");

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::string> vocab = {"a", "the", "yes", "no"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<HypothesisWord> in;
    const int count = 2 + static_cast<int>(u(rng) * 30);
    for (int i = 0; i < count; ++i) {
      const double s = 5 * u(rng);
      in.push_back(w("u" + std::to_string(static_cast<int>(u(rng) * 4)), vocab[static_cast<std::size_t>(u(rng) * 4)],
                     s, s + 0.1 + 0.5 * u(rng), std::round(u(rng) * 4) / 4));
    }
    const auto out = deduplicate(in, 0.5);
    if (ids(deduplicate(out, 0.5)) != ids(out)) {
      failures.push_back("idempotence");
      break;
    }
    std::size_t cursor = 0;
    for (const auto& x : out) {
      while (cursor < in.size() && !(in[cursor].utterance_id == x.utterance_id && in[cursor].start == x.start &&
                                     in[cursor].token == x.token))
        ++cursor;
      if (cursor++ >= in.size()) {
        failures.push_back("subset");
        break;
      }
    }
  }
  std::string detail = "3 examples, 500 random idempotence and subset trials";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

// 11. One 30 s window over 24 channels with the default chain.
Outcome throughput() {
  const auto gt = generate_scene(scene_config(1100, 4, 6, 30.0));
  const auto& target = *std::min_element(gt.utterances.begin(), gt.utterances.end(), [](const auto& a, const auto& b) {
    return std::abs(0.5 * (a.start + a.end) - 15.0) < std::abs(0.5 * (b.start + b.end) - 15.0);
  });
  PipelineConfig cfg;
  cfg.gss.iterations = 20;
  const int saved = thread_count();
  set_thread_count(1);
  const auto t0 = Clock::now();
  const auto r = enhance_utterance(gt.mixtures, gt.utterances, target, cfg);
  const double elapsed = seconds_since(t0);
  set_thread_count(saved);
  const double window = static_cast<double>(r.window_end - r.window_start) / gt.config.sample_rate;
  return {elapsed < 180.0 && window >= 29.9,
          fmt("%.1f s window, %.0f channels, %.1f s single-threaded", window,
              static_cast<double>(gt.mixtures.size() * 4), elapsed)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  int seeds = 10;
  int threads = 1;
  app.add_option("--only", only, "Criteria to run (default all)");
  app.add_option("--seeds", seeds, "Scenes per seeded criterion")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  bool all_pass = true;
  auto report = [&](int c, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c << " (" << name << "): " << o.detail
              << std::endl;
    all_pass = all_pass && o.pass;
  };

  if (wanted(1)) report(1, "stft round trip", stft_round_trip());
  if (wanted(2) || wanted(3)) {
    const auto em = em_properties(seeds);
    if (wanted(2)) report(2, "EM monotonicity", em.monotone);
    if (wanted(3)) report(3, "activity constraints", em.constraints);
  }
  if (wanted(4)) report(4, "MVDR and BAN closed forms", beamformer_closed_forms());
  if (wanted(5)) report(5, "separation gain", separation_gain(seeds));
  if (wanted(6)) report(6, "array-count trend", array_trend(seeds));
  if (wanted(7)) report(7, "beamformer context ablation", context_ablation(seeds));
  if (wanted(8)) report(8, "alignment refinement", alignment_refinement(seeds));
  if (wanted(9)) report(9, "WPE sanity", wpe_sanity(seeds));
  if (wanted(10)) report(10, "hypothesis deduplication", dedup_suite());
  if (wanted(11)) report(11, "throughput", throughput());
  return all_pass ? 0 : 1;
}
