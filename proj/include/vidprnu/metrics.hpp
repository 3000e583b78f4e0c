#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/similarity.hpp"

namespace vidprnu {

/// Video id -> device id.
using GroundTruth = std::map<std::string, std::string>;

/// labels.csv: header "video_id,device_id", one row per video.
GroundTruth parse_labels(std::string_view text);
GroundTruth read_labels(const std::filesystem::path& path);
std::string labels_to_csv(const GroundTruth& truth);
void write_labels(const std::filesystem::path& path, const GroundTruth& truth);

/// Videos per device.
std::map<std::string, std::size_t> device_totals(const GroundTruth& truth);

struct TprOptions {
  /// Score a mixed cluster by its predominant device instead of 0.
  bool majority = false;
  /// Divide by this instead of the device's true video count.
  std::optional<std::size_t> fixed_denominator;
};

struct GroupTpr {
  std::string device;  // predominant device (smallest id on ties)
  std::size_t members = 0;
  std::size_t hits = 0;         // members of `device` credited to the group
  std::size_t denominator = 0;  // videos of `device`
  bool pure = false;
  double percent = 0.0;         // 100 * hits / denominator
};

/// Throws Error(Label) for an id without ground truth, Error(Range) for an
/// empty cluster.
GroupTpr group_tpr(std::span<const std::string> cluster, const GroundTruth& truth, const TprOptions& options = {});

struct TprSummary {
  std::vector<GroupTpr> groups;
  double average = 0.0;
};

/// Mean group TPR. Throws Error(Label) when an id occurs in two clusters.
TprSummary average_tpr(std::span<const std::vector<std::string>> clusters, const GroundTruth& truth,
                       const TprOptions& options = {});

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// ROC of "score >= t" over every distinct score t, descending, with the
/// trapezoidal area. Throws Error(DegenerateLabels) if either set is empty.
RocResult roc_from_scores(std::span<const double> positives, std::span<const double> negatives);

/// Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2.
double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives);

/// Pairwise verification ROC: every off-diagonal pair of the matrix is a
/// score, positive when both videos come from the same device.
RocResult roc_auc(const SimilarityMatrix& sim, const GroundTruth& truth);

struct EvalReport {
  TprSummary tpr;
  std::optional<RocResult> roc;
  std::string tpr_rule;  // "pure" or "majority"
};

EvalReport evaluate(std::span<const std::vector<std::string>> clusters, const GroundTruth& truth,
                    const SimilarityMatrix* sim, const TprOptions& options = {});

/// Percentages rounded to one decimal, AUC to nine.
std::string report_to_json(const EvalReport& report, std::span<const std::vector<std::string>> clusters);
/// Header "fpr,tpr", one row per point.
std::string roc_to_csv(const RocResult& roc);

}  // namespace vidprnu
