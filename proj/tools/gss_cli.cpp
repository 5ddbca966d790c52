// gss: command-line front end for enhancement, scene simulation, evaluation
// and hypothesis deduplication.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gss/config_io.hpp"
#include "gss/hypothesis.hpp"
#include "gss/metrics.hpp"
#include "gss/parallel.hpp"
#include "gss/pipeline.hpp"
#include "gss/scene.hpp"
#include "gss/wav.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitItemFailures = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct EnhanceArgs {
  std::string config;
  std::vector<std::string> audio;
  std::string scene;
  std::string annotations;
  std::string alignment;
  std::string arrays;
  std::string output_dir;
  std::optional<double> context_seconds;
  std::string bf_context;
  std::string wpe;
  std::string gss;
  std::optional<int> wpe_taps, wpe_delay, wpe_iterations, gss_iterations;
  std::optional<double> loading;
  std::string reference;
  bool export_masks = false;
};

int run_enhance_command(const EnhanceArgs& args) {
  gss::PipelineConfig cfg;
  if (!args.config.empty()) cfg = gss::parse_pipeline_config(gss::io::read_text(args.config));
  if (!args.arrays.empty()) {
    cfg.arrays.clear();
    for (const auto& a : split(args.arrays, ',')) cfg.arrays.push_back(std::stoi(a));
  }
  if (args.context_seconds) cfg.context = {*args.context_seconds, *args.context_seconds};
  if (!args.bf_context.empty()) cfg.bf_context = args.bf_context == "on";
  if (args.wpe == "off") cfg.wpe.reset();
  if (args.wpe == "on" && !cfg.wpe) cfg.wpe = gss::WpeConfig{};
  if (cfg.wpe) {
    if (args.wpe_taps) cfg.wpe->taps = *args.wpe_taps;
    if (args.wpe_delay) cfg.wpe->delay = *args.wpe_delay;
    if (args.wpe_iterations) cfg.wpe->iterations = *args.wpe_iterations;
  }
  if (!args.gss.empty()) cfg.gss_enabled = args.gss == "on";
  if (args.gss_iterations) cfg.gss.iterations = *args.gss_iterations;
  if (args.loading) cfg.bf_loading = *args.loading;
  if (!args.reference.empty()) {
    if (args.reference == "max_snr") {
      cfg.reference_policy = gss::ReferencePolicy::MaxSnr;
    } else {
      cfg.reference_policy = gss::ReferencePolicy::Fixed;
      cfg.reference_channel = std::stoi(args.reference);
    }
  }
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  if (args.export_masks) cfg.export_masks = true;
  gss::validate(cfg);

  std::vector<gss::WaveformSegment> arrays;
  std::string annotations = args.annotations;
  if (!args.scene.empty()) {
    for (int a = 0;; ++a) {
      const fs::path p = fs::path(args.scene) / ("mix_array" + std::to_string(a) + ".wav");
      if (!fs::exists(p)) break;
      arrays.push_back(gss::wav::read(p.string()));
    }
    if (annotations.empty()) annotations = (fs::path(args.scene) / "annotations.json").string();
  }
  for (const auto& spec : args.audio) arrays.push_back(gss::wav::read_array(split(spec, ',')));
  if (arrays.empty()) throw CLI::ValidationError("enhance", "no audio given (--audio or --scene)");
  if (annotations.empty()) throw CLI::ValidationError("enhance", "--annotations is required");

  const auto anns = gss::io::read_annotations(annotations);
  std::optional<std::vector<gss::AlignmentTrack>> alignment;
  if (!args.alignment.empty()) alignment = gss::io::read_alignment(args.alignment);

  const gss::EnhanceSummary summary = gss::run_enhance(cfg, arrays, anns, alignment);
  std::cerr << summary.processed << " utterances enhanced, " << summary.failed << " failed\n";
  return summary.failed > 0 ? kExitItemFailures : kExitOk;
}

int run_simulate_command(const std::string& config, std::optional<std::uint64_t> seed,
                         const std::string& out_dir) {
  gss::SceneConfig cfg;
  if (!config.empty()) cfg = gss::io::read_scene_config(config);
  if (seed) cfg.seed = *seed;
  const gss::SceneGroundTruth gt = gss::generate_scene(cfg);
  gss::save_scene(gt, out_dir);
  const auto manifest = nlohmann::json::parse(gss::io::read_text((fs::path(out_dir) / "manifest.json").string()));
  std::cout << manifest.at("checksum").get<std::string>() << "\n";
  return kExitOk;
}

int run_evaluate_command(const std::string& scene_dir, const std::string& enhanced_dir,
                         const std::string& condition, std::string out_prefix) {
  const gss::SceneGroundTruth gt = gss::load_scene(scene_dir);
  const fs::path manifest_path = fs::path(enhanced_dir) / "enhance_manifest.json";

  std::vector<gss::EnhancedUtterance> enhanced;
  auto load_entry = [&](const std::string& utt, const std::string& spk, const std::string& file,
                        int ref_array, int ref_channel) {
    const fs::path p = fs::path(enhanced_dir) / file;
    if (!fs::exists(p)) throw gss::Error("missing enhanced file " + p.string());
    gss::EnhancedUtterance e;
    e.utterance_id = utt;
    e.speaker_id = spk;
    e.waveform = gss::wav::read(p.string()).samples.row(0).transpose();
    e.reference_array = ref_array;
    e.reference_channel = ref_channel;
    return e;
  };
  if (fs::exists(manifest_path)) {
    const auto manifest = nlohmann::json::parse(gss::io::read_text(manifest_path.string()));
    for (const auto& entry : manifest.at("utterances")) {
      auto e = load_entry(entry.at("utterance_id"), entry.at("speaker_id"), entry.at("file"),
                          entry.value("reference_array", 0), entry.value("reference_channel", 0));
      if (entry.contains("masks")) {
        e.masks = gss::read_masks((fs::path(enhanced_dir) / entry.at("masks").get<std::string>()).string());
        e.mask_frame_offset = entry.value("mask_frame_offset", 0);
      }
      enhanced.push_back(std::move(e));
    }
  } else {
    for (const auto& u : gt.utterances)
      enhanced.push_back(load_entry(u.utterance_id, u.speaker_id,
                                    u.speaker_id + "_" + u.utterance_id + ".wav", 0, 0));
  }
  if (enhanced.size() != gt.utterances.size())
    throw gss::Error("enhanced directory holds " + std::to_string(enhanced.size()) +
                     " utterances, scene has " + std::to_string(gt.utterances.size()));

  const gss::EvalReport report = gss::evaluate_scene(gt, enhanced, condition);
  if (out_prefix.empty()) out_prefix = (fs::path(enhanced_dir) / "report").string();
  gss::io::write_text(out_prefix + ".tsv", gss::format_report_tsv({report}));
  gss::io::write_text(out_prefix + ".json", gss::format_report_json({report}));
  std::cout << gss::format_report_tsv({report});
  return kExitOk;
}

int run_dedup_command(const std::string& input, const std::string& output, double threshold) {
  const auto words = gss::parse_ctm(gss::io::read_text(input));
  const std::string text = gss::format_ctm(gss::deduplicate(words, threshold));
  if (output.empty() || output == "-")
    std::cout << text;
  else
    gss::io::write_text(output, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided source separation toolkit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for per-frequency loops")
      ->check(CLI::PositiveNumber);

  EnhanceArgs enhance;
  auto* enh = app.add_subcommand("enhance", "Enhance annotated utterances");
  enh->add_option("--config", enhance.config, "Pipeline config file")->check(CLI::ExistingFile);
  enh->add_option("--audio", enhance.audio,
                  "One array per occurrence; comma-separated files are stacked as one array");
  enh->add_option("--scene", enhance.scene, "Scene directory written by `simulate`")
      ->check(CLI::ExistingDirectory);
  enh->add_option("--annotations", enhance.annotations, "Utterance annotation file");
  enh->add_option("--alignment", enhance.alignment, "Alignment file for refinement")
      ->check(CLI::ExistingFile);
  enh->add_option("--arrays", enhance.arrays, "Comma-separated array indices");
  enh->add_option("--context-seconds", enhance.context_seconds, "Left/right context (default 15)")
      ->check(CLI::NonNegativeNumber);
  enh->add_option("--bf-context", enhance.bf_context, "Use context frames in beamformer statistics")
      ->check(CLI::IsMember({"on", "off"}));
  enh->add_option("--wpe", enhance.wpe, "Dereverberation")->check(CLI::IsMember({"on", "off"}));
  enh->add_option("--wpe-taps", enhance.wpe_taps);
  enh->add_option("--wpe-delay", enhance.wpe_delay);
  enh->add_option("--wpe-iterations", enhance.wpe_iterations);
  enh->add_option("--gss", enhance.gss, "Mask estimation and beamforming")
      ->check(CLI::IsMember({"on", "off"}));
  enh->add_option("--gss-iterations", enhance.gss_iterations);
  enh->add_option("--loading", enhance.loading, "Beamformer diagonal loading");
  enh->add_option("--reference", enhance.reference, "max_snr or a stacked channel index");
  enh->add_option("--output-dir", enhance.output_dir, "Output directory");
  enh->add_flag("--export-masks", enhance.export_masks, "Write mask files");

  std::string scene_config, scene_out = "scene";
  std::optional<std::uint64_t> seed;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scene");
  sim->add_option("--config", scene_config, "Scene config file")->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Override the config seed");
  sim->add_option("--out", scene_out, "Output directory");

  std::string eval_scene, eval_enhanced, eval_condition = "default", eval_out;
  auto* eva = app.add_subcommand("evaluate", "Score enhanced utterances against a scene");
  eva->add_option("--scene", eval_scene)->required()->check(CLI::ExistingDirectory);
  eva->add_option("--enhanced", eval_enhanced)->required()->check(CLI::ExistingDirectory);
  eva->add_option("--condition", eval_condition, "Condition label in the report");
  eva->add_option("--out", eval_out, "Report path prefix (default <enhanced>/report)");

  std::string ctm_in, ctm_out;
  double threshold = 0.5;
  auto* ded = app.add_subcommand("dedup", "Remove duplicated words across overlapping utterances");
  ded->add_option("--input", ctm_in)->required()->check(CLI::ExistingFile);
  ded->add_option("--output", ctm_out, "Output file (default stdout)");
  ded->add_option("--threshold", threshold, "Overlap fraction of the shorter word")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  gss::set_thread_count(threads);

  try {
    if (*enh) return run_enhance_command(enhance);
    if (*sim) return run_simulate_command(scene_config, seed, scene_out);
    if (*eva) return run_evaluate_command(eval_scene, eval_enhanced, eval_condition, eval_out);
    if (*ded) return run_dedup_command(ctm_in, ctm_out, threshold);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitItemFailures;
  }
  return kExitUsage;
}
