#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/clustering.hpp"
#include "vidprnu/denoise.hpp"
#include "vidprnu/fingerprint.hpp"
#include "vidprnu/metrics.hpp"

namespace vidprnu {

struct VideoInput {
  std::string id;
  std::filesystem::path frames_dir;
  std::string pattern = "frame_{index}.pgm";
  std::filesystem::path coeffs;
};

/// CSV with header "video_id,frames_dir,coeffs[,pattern]"; relative paths
/// resolve against the list's directory.
std::vector<VideoInput> read_video_list(const std::filesystem::path& path);

/// Loads frames and coefficient dump of one video and pairs them.
VideoFrameSet load_video(const VideoInput& input, bool strict, std::vector<std::string>* warnings = nullptr);

struct PipelineOptions {
  DenoiserParams denoiser;
  std::string denoiser_name = "wavelet-wiener";
  bool enhance = true;
  std::vector<double> alphas{20.0};
  bool strict = true;
  std::optional<std::size_t> k;
  std::optional<GroundTruth> labels;
  TprOptions tpr;
  std::filesystem::path out_dir;
  std::function<void(std::string_view)> log;
};

/// Output file name for one alpha of a sweep, e.g. ("report", "json", 20) ->
/// "report_alpha20.json".
std::string alpha_file_name(std::string_view stem, std::string_view extension, double alpha);

struct PipelineOutputs {
  std::vector<std::filesystem::path> fingerprints;
  std::vector<std::filesystem::path> reports;
};

/// extract -> enhance -> correlate -> cluster -> evaluate. Raw fingerprints go
/// to <out>/fingerprints. With a single alpha the stage outputs are
/// matrix.csv, clusters.json, report.json and roc.csv; a sweep suffixes each
/// with _alpha<value>. Evaluation needs labels; without them the report holds
/// only the clustering.
PipelineOutputs run_pipeline(const std::vector<VideoInput>& videos, const PipelineOptions& options);

/// report.json content for one clustering, with evaluation when labels exist.
std::string pipeline_report(const ClusterResult& clusters, const std::optional<EvalReport>& eval,
                            std::optional<double> alpha);

}  // namespace vidprnu
