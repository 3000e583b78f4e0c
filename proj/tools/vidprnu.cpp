// vidprnu: source-camera clustering of videos from sensor-noise fingerprints.
//
// Exit codes: 0 ok, 1 usage or invalid parameters, 2 data error, 3 internal.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vidprnu/clustering.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/fingerprint.hpp"
#include "vidprnu/io.hpp"
#include "vidprnu/kernels.hpp"
#include "vidprnu/metrics.hpp"
#include "vidprnu/pipeline.hpp"
#include "vidprnu/similarity.hpp"
#include "vidprnu/synth.hpp"

namespace fs = std::filesystem;
using namespace vidprnu;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

bool g_verbose = false;

void log(std::string_view message) {
  if (g_verbose) std::cerr << "vidprnu: " << message << '\n';
}

struct DenoiserFlags {
  std::string name = "wavelet-wiener";
  double sigma0_sq = 9.0;
  std::size_t levels = 4;
  std::vector<std::size_t> windows{3, 5, 7, 9};
  bool lenient = false;

  void attach(CLI::App* app) {
    app->add_option("--denoiser", name, "Denoising filter")->check(CLI::IsMember(denoiser_names()))
        ->capture_default_str();
    app->add_option("--sigma0", sigma0_sq, "Noise floor variance on the 0-255 scale")->capture_default_str();
    app->add_option("--levels", levels, "Wavelet decomposition levels")->capture_default_str();
    app->add_option("--windows", windows, "Local variance window sizes")->delimiter(',')->capture_default_str();
    app->add_flag("--lenient", lenient, "Accept coefficient dumps that do not cover the macroblock grid");
  }

  DenoiserParams params() const {
    DenoiserParams p;
    p.noise_floor_variance = sigma0_sq;
    p.levels = levels;
    p.window_sizes = windows;
    p.validate();
    return p;
  }
};

struct TprFlags {
  bool majority = false;
  std::optional<std::size_t> denominator;

  void attach(CLI::App* app) {
    app->add_flag("--majority-tpr", majority, "Credit mixed groups to their predominant device");
    app->add_option("--fixed-denominator", denominator, "Divide every group TPR by this fixed count")
        ->check(CLI::PositiveNumber);
  }

  TprOptions options() const { return {majority, denominator}; }
};

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cli", "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
}

std::vector<Fingerprint> read_fingerprints(const std::vector<std::string>& paths) {
  std::vector<Fingerprint> fps;
  fps.reserve(paths.size());
  for (const auto& p : paths) fps.push_back(read_fingerprint(p));
  return fps;
}

std::vector<VideoInput> inputs_from_manifest(const Manifest& m) {
  std::vector<VideoInput> inputs;
  for (const auto& v : m.videos) inputs.push_back({v.id, v.frames_dir, v.pattern, v.coeffs});
  return inputs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster videos by source camera using sensor-noise fingerprints"};
  app.require_subcommand(1);

  int threads = 0;
  std::optional<std::uint64_t> global_seed;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", g_verbose, "Progress messages on stderr");
  app.add_option("--seed", global_seed, "Default random seed for synth");

  // extract
  auto* extract = app.add_subcommand("extract", "Estimate raw fingerprints from frames and coefficient dumps");
  std::string ex_frames, ex_coeffs, ex_list, ex_out, ex_id, ex_pattern = "frame_{index}.pgm";
  DenoiserFlags ex_denoise;
  auto* ex_frames_opt = extract->add_option("--frames", ex_frames, "Frame directory of one video");
  extract->add_option("--pattern", ex_pattern, "Frame file name template")->capture_default_str();
  auto* ex_coeffs_opt = extract->add_option("--coeffs", ex_coeffs, "Coefficient dump of one video");
  auto* ex_list_opt = extract->add_option("--list", ex_list, "CSV video list (video_id,frames_dir,coeffs[,pattern])");
  extract->add_option("--id", ex_id, "Video id (defaults to the output file stem)");
  extract->add_option("--out", ex_out, "Output .vfp file, or directory with --list")->required();
  ex_frames_opt->needs(ex_coeffs_opt)->excludes(ex_list_opt);
  ex_coeffs_opt->needs(ex_frames_opt);
  ex_denoise.attach(extract);

  // enhance
  auto* enh = app.add_subcommand("enhance", "Suppress scene detail in fingerprints");
  std::vector<std::string> en_in;
  std::string en_out, en_model = "gamma3";
  double en_alpha = 20.0;
  enh->add_option("--in", en_in, "Input .vfp files")->required()->check(CLI::ExistingFile);
  enh->add_option("--out", en_out, "Output file (single input) or directory")->required();
  enh->add_option("--model", en_model, "Enhancer")->check(CLI::IsMember(enhancer_names()))->capture_default_str();
  enh->add_option("--alpha", en_alpha, "Enhancer threshold")->capture_default_str();

  // correlate
  auto* corr = app.add_subcommand("correlate", "Pairwise correlation matrix of fingerprints");
  std::vector<std::string> co_fps;
  std::string co_out;
  corr->add_option("--fps", co_fps, "Input .vfp files")->required()->check(CLI::ExistingFile);
  corr->add_option("--out", co_out, "Output matrix.csv")->required();

  // cluster
  auto* clus = app.add_subcommand("cluster", "Average-linkage clustering with silhouette-selected k");
  std::string cl_matrix, cl_out;
  std::optional<std::size_t> cl_k;
  clus->add_option("--matrix", cl_matrix, "Similarity matrix CSV")->required()->check(CLI::ExistingFile);
  clus->add_option("--out", cl_out, "Output clusters.json")->required();
  clus->add_option("--k", cl_k, "Fixed number of clusters");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Group TPR and pairwise ROC against ground truth");
  std::string ev_clusters, ev_labels, ev_out, ev_roc, ev_matrix;
  TprFlags ev_tpr;
  eval->add_option("--clusters", ev_clusters, "clusters.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", ev_labels, "labels.csv")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", ev_out, "Output report.json")->required();
  auto* ev_roc_opt = eval->add_option("--roc", ev_roc, "Output roc.csv");
  auto* ev_matrix_opt = eval->add_option("--matrix", ev_matrix, "Similarity matrix for the ROC")->check(CLI::ExistingFile);
  ev_roc_opt->needs(ev_matrix_opt);
  ev_tpr.attach(eval);

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic dataset with known devices");
  SynthConfig sc;
  std::string sy_scene = "textured", sy_out;
  std::optional<std::uint64_t> sy_seed;
  syn->add_option("--devices", sc.devices, "Number of devices")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--videos", sc.videos_per_device, "Videos per device (one value or one per device)")
      ->delimiter(',')
      ->capture_default_str();
  syn->add_option("--frames", sc.frames, "Frames per video")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--width", sc.width, "Frame width")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--height", sc.height, "Frame height")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--strength", sc.strength, "Fingerprint strength")->capture_default_str();
  syn->add_option("--dead-frac", sc.dead_fraction, "Fraction of dead macroblocks")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  syn->add_option("--scene", sy_scene, "Scene model")
      ->check(CLI::IsMember({"flat", "gradient", "textured"}))
      ->capture_default_str();
  syn->add_option("--shot-var", sc.shot_variance, "Shot-noise variance")->capture_default_str();
  syn->add_option("--seed", sy_seed, "Random seed");
  syn->add_option("--out", sy_out, "Output directory")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "extract, enhance, correlate, cluster and evaluate in one run");
  std::string pi_manifest, pi_list, pi_labels, pi_out;
  std::vector<double> pi_alphas{20.0};
  bool pi_no_enhance = false;
  std::optional<std::size_t> pi_k;
  DenoiserFlags pi_denoise;
  TprFlags pi_tpr;
  auto* pi_manifest_opt = pipe->add_option("--manifest", pi_manifest, "Synthetic dataset manifest.json")
                              ->check(CLI::ExistingFile);
  auto* pi_list_opt = pipe->add_option("--list", pi_list, "CSV video list")->check(CLI::ExistingFile);
  pi_manifest_opt->excludes(pi_list_opt);
  pipe->add_option("--labels", pi_labels, "labels.csv (defaults to the manifest's)")->check(CLI::ExistingFile);
  pipe->add_option("--out", pi_out, "Output directory")->required();
  pipe->add_option("--alpha", pi_alphas, "Enhancer threshold; several values run a sweep")
      ->delimiter(',')
      ->capture_default_str();
  pipe->add_flag("--no-enhance", pi_no_enhance, "Correlate raw fingerprints");
  pipe->add_option("--k", pi_k, "Fixed number of clusters");
  pi_denoise.attach(pipe);
  pi_tpr.attach(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    kernels::set_thread_count(threads);

    if (extract->parsed()) {
      if (ex_list.empty() && ex_frames.empty()) throw CLI::ValidationError("extract", "need --frames/--coeffs or --list");
      const DenoiserParams params = ex_denoise.params();
      const auto denoiser = make_denoiser(ex_denoise.name, params);
      std::vector<VideoInput> inputs;
      if (!ex_list.empty()) {
        inputs = read_video_list(ex_list);
      } else {
        const std::string id = ex_id.empty() ? fs::path(ex_out).stem().string() : ex_id;
        inputs.push_back({id, ex_frames, ex_pattern, ex_coeffs});
      }
      for (const auto& v : inputs) {
        std::vector<std::string> warnings;
        const VideoFrameSet set = load_video(v, !ex_denoise.lenient, &warnings);
        for (const auto& w : warnings) std::cerr << "vidprnu: warning: " << v.id << ": " << w << '\n';
        const Fingerprint fp = extract_video_fingerprint(set, *denoiser, std::nullopt, v.id);
        const fs::path out = ex_list.empty() ? fs::path(ex_out) : fs::path(ex_out) / (v.id + ".vfp");
        ensure_parent(out);
        write_fingerprint(out, fp);
        log("extracted " + v.id + " from " + std::to_string(set.frame_count()) + " frames -> " + out.string());
      }
    } else if (enh->parsed()) {
      const EnhancerParams params{en_model, en_alpha};
      params.validate();
      const bool to_dir = en_in.size() > 1 || fs::is_directory(en_out);
      for (const auto& in : en_in) {
        const Fingerprint fp = enhance(read_fingerprint(in), params);
        const fs::path out = to_dir ? fs::path(en_out) / fs::path(in).filename() : fs::path(en_out);
        ensure_parent(out);
        write_fingerprint(out, fp);
        log("enhanced " + in + " -> " + out.string());
      }
    } else if (corr->parsed()) {
      const auto fps = read_fingerprints(co_fps);
      const SimilarityMatrix sim = build_matrix(fps);
      ensure_parent(co_out);
      write_matrix(co_out, sim);
      log("wrote " + std::to_string(sim.size()) + "x" + std::to_string(sim.size()) + " matrix to " + co_out);
    } else if (clus->parsed()) {
      const SimilarityMatrix sim = read_matrix(cl_matrix);
      check_symmetric(sim);
      const ClusterResult result = select_clustering(sim, cl_k);
      ensure_parent(cl_out);
      write_clusters(cl_out, result);
      log("k=" + std::to_string(result.k) + " silhouette " + std::to_string(result.silhouette));
    } else if (eval->parsed()) {
      const auto clusters = read_clusters(ev_clusters);
      const GroundTruth truth = read_labels(ev_labels);
      std::optional<SimilarityMatrix> sim;
      if (!ev_matrix.empty()) {
        sim = read_matrix(ev_matrix);
        check_symmetric(*sim);
      }
      const EvalReport report = evaluate(clusters, truth, sim ? &*sim : nullptr, ev_tpr.options());
      ensure_parent(ev_out);
      write_file_atomic(ev_out, report_to_json(report, clusters), "cli");
      if (!ev_roc.empty()) {
        ensure_parent(ev_roc);
        write_file_atomic(ev_roc, roc_to_csv(*report.roc), "cli");
      }
      std::printf("average TPR %.1f%%", report.tpr.average);
      if (report.roc) std::printf("  AUC %.6f", report.roc->auc);
      std::printf("\n");
    } else if (syn->parsed()) {
      sc.scene = parse_scene_model(sy_scene);
      sc.seed = sy_seed ? *sy_seed : global_seed.value_or(1);
      sc.validate();
      const Manifest m = generate_dataset(sc, sy_out);
      log("wrote " + std::to_string(m.videos.size()) + " videos of " + std::to_string(m.devices.size()) +
          " devices to " + sy_out);
    } else if (pipe->parsed()) {
      if (pi_manifest.empty() && pi_list.empty()) throw CLI::ValidationError("pipeline", "need --manifest or --list");
      PipelineOptions opts;
      opts.denoiser = pi_denoise.params();
      opts.denoiser_name = pi_denoise.name;
      opts.enhance = !pi_no_enhance;
      opts.alphas = pi_alphas;
      opts.strict = !pi_denoise.lenient;
      opts.k = pi_k;
      opts.tpr = pi_tpr.options();
      opts.out_dir = pi_out;
      opts.log = [](std::string_view m) { log(m); };
      std::vector<VideoInput> inputs;
      std::string labels = pi_labels;
      if (!pi_manifest.empty()) {
        const Manifest m = read_manifest(pi_manifest);
        inputs = inputs_from_manifest(m);
        if (labels.empty()) labels = m.labels.string();
      } else {
        inputs = read_video_list(pi_list);
      }
      if (!labels.empty()) opts.labels = read_labels(labels);
      const PipelineOutputs out = run_pipeline(inputs, opts);
      for (const auto& r : out.reports) std::printf("%s\n", r.string().c_str());
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "vidprnu: " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "vidprnu: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
