#include "vidprnu/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"
#include "vidprnu/similarity.hpp"

namespace vidprnu {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "pipeline";

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void say(const PipelineOptions& options, const std::string& message) {
  if (options.log) options.log(message);
}

}  // namespace

std::vector<VideoInput> read_video_list(const fs::path& path) {
  const std::string text = read_file(path, kModule);
  const fs::path base = path.parent_path();
  std::vector<VideoInput> videos;
  bool header = false;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line(text.data() + start, (nl == std::string::npos ? text.size() : nl) - start);
    start = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    auto fields = split_fields(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (!header) {
      if (fields.size() < 3 || fields[0] != "video_id" || fields[1] != "frames_dir" || fields[2] != "coeffs")
        throw Error(ErrorKind::Format, kModule, "video list header must be 'video_id,frames_dir,coeffs[,pattern]'");
      header = true;
      continue;
    }
    if (fields.size() < 3 || fields.size() > 4)
      throw Error(ErrorKind::Format, kModule, "video list line " + std::to_string(line_no) + ": expected 3 or 4 fields");
    VideoInput v;
    v.id = fields[0];
    v.frames_dir = base / fields[1];
    v.coeffs = base / fields[2];
    if (fields.size() == 4 && !fields[3].empty()) v.pattern = fields[3];
    videos.push_back(std::move(v));
  }
  return videos;
}

VideoFrameSet load_video(const VideoInput& input, bool strict, std::vector<std::string>* warnings) {
  auto frames = load_frame_sequence(input.frames_dir, input.pattern);
  const std::size_t w = frames.front().width(), h = frames.front().height();
  ParseOptions parse;
  parse.strict = strict;
  parse.warnings = warnings;
  auto coeffs = load_coeff_dump(input.coeffs.string(), w, h, parse);
  return align(std::move(frames), std::move(coeffs), strict);
}

std::string alpha_file_name(std::string_view stem, std::string_view extension, double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return std::string(stem) + "_alpha" + buf + "." + std::string(extension);
}

std::string pipeline_report(const ClusterResult& clusters, const std::optional<EvalReport>& eval,
                            std::optional<double> alpha) {
  nlohmann::ordered_json j;
  j["enhancer"] = alpha ? nlohmann::ordered_json("gamma3") : nlohmann::ordered_json(nullptr);
  j["alpha"] = alpha ? nlohmann::ordered_json(*alpha) : nlohmann::ordered_json(nullptr);
  j["silhouette"] = std::round(clusters.silhouette * 1e9) / 1e9;
  const auto groups = clusters.clusters();
  if (eval) {
    auto body = nlohmann::ordered_json::parse(report_to_json(*eval, groups));
    for (auto& [key, value] : body.items()) j[key] = value;
  } else {
    j["k"] = clusters.k;
    j["clusters"] = groups;
  }
  return j.dump(2) + "\n";
}

PipelineOutputs run_pipeline(const std::vector<VideoInput>& videos, const PipelineOptions& options) {
  options.denoiser.validate();
  if (options.enhance) {
    if (options.alphas.empty()) throw Error(ErrorKind::Config, kModule, "no alpha values");
    for (double a : options.alphas) EnhancerParams{"gamma3", a}.validate();
  }
  if (videos.empty()) throw Error(ErrorKind::Config, kModule, "no input videos");
  const auto denoiser = make_denoiser(options.denoiser_name, options.denoiser);

  std::error_code ec;
  fs::create_directories(options.out_dir / "fingerprints", ec);
  if (ec) throw Error(ErrorKind::Io, kModule, "cannot create " + options.out_dir.string() + ": " + ec.message());

  PipelineOutputs outputs;
  std::vector<Fingerprint> raw;
  raw.reserve(videos.size());
  for (const auto& v : videos) {
    std::vector<std::string> warnings;
    const VideoFrameSet set = load_video(v, options.strict, &warnings);
    for (const auto& w : warnings) say(options, v.id + ": " + w);
    raw.push_back(extract_video_fingerprint(set, *denoiser, std::nullopt, v.id));
    const fs::path path = options.out_dir / "fingerprints" / (v.id + ".vfp");
    write_fingerprint(path, raw.back());
    outputs.fingerprints.push_back(path);
    say(options, "extracted " + v.id + " (" + std::to_string(set.frame_count()) + " frames)");
  }
  if (raw.size() < 3)
    throw Error(ErrorKind::TooFewItems, "clustering",
                "need at least 3 videos to choose a clustering, got " + std::to_string(raw.size()));

  const bool sweep = options.enhance && options.alphas.size() > 1;
  std::vector<std::optional<double>> runs;
  if (options.enhance)
    for (double a : options.alphas) runs.emplace_back(a);
  else
    runs.emplace_back(std::nullopt);

  for (const auto& alpha : runs) {
    auto name = [&](std::string_view stem, std::string_view ext) {
      return options.out_dir /
             (sweep ? alpha_file_name(stem, ext, *alpha) : std::string(stem) + "." + std::string(ext));
    };
    std::vector<Fingerprint> fps;
    if (alpha) {
      fps.reserve(raw.size());
      for (const auto& fp : raw) fps.push_back(enhance(fp, EnhancerParams{"gamma3", *alpha}));
    } else {
      fps = raw;
    }
    const SimilarityMatrix sim = build_matrix(fps);
    write_matrix(name("matrix", "csv"), sim);
    const ClusterResult clusters = select_clustering(sim, options.k);
    write_clusters(name("clusters", "json"), clusters);

    std::optional<EvalReport> eval;
    if (options.labels) {
      const auto groups = clusters.clusters();
      eval = evaluate(groups, *options.labels, &sim, options.tpr);
      write_file_atomic(name("roc", "csv"), roc_to_csv(*eval->roc), kModule);
    }
    const fs::path report = name("report", "json");
    write_file_atomic(report, pipeline_report(clusters, eval, alpha), kModule);
    outputs.reports.push_back(report);
    std::string line = "k=" + std::to_string(clusters.k);
    if (eval) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " average TPR %.1f%% AUC %.6f", eval->tpr.average, eval->roc->auc);
      line += buf;
    }
    say(options, report.filename().string() + ": " + line);
  }
  return outputs;
}

}  // namespace vidprnu
