#include "vidprnu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "metrics";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

const std::string& device_of(const GroundTruth& truth, const std::string& id) {
  auto it = truth.find(id);
  if (it == truth.end()) throw Error(ErrorKind::Label, kModule, "no ground truth for video '" + id + "'");
  return it->second;
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

}  // namespace

GroundTruth parse_labels(std::string_view text) {
  GroundTruth truth;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header = false;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw Error(ErrorKind::Format, kModule, "labels line " + std::to_string(line_no) + ": expected two fields");
    std::string_view video = trim(line.substr(0, comma));
    std::string_view device = trim(line.substr(comma + 1));
    if (!header) {
      if (video != "video_id" || device != "device_id")
        throw Error(ErrorKind::Format, kModule, "labels header must be 'video_id,device_id'");
      header = true;
      continue;
    }
    if (video.empty() || device.empty())
      throw Error(ErrorKind::Format, kModule, "labels line " + std::to_string(line_no) + ": empty field");
    if (!truth.emplace(std::string(video), std::string(device)).second)
      throw Error(ErrorKind::Format, kModule, "duplicate label for video '" + std::string(video) + "'");
  }
  if (!header) throw Error(ErrorKind::Format, kModule, "empty labels file");
  return truth;
}

GroundTruth read_labels(const std::filesystem::path& path) { return parse_labels(read_file(path, kModule)); }

std::string labels_to_csv(const GroundTruth& truth) {
  std::string out = "video_id,device_id\n";
  for (const auto& [video, device] : truth) out += video + "," + device + "\n";
  return out;
}

void write_labels(const std::filesystem::path& path, const GroundTruth& truth) {
  write_file_atomic(path, labels_to_csv(truth), kModule);
}

std::map<std::string, std::size_t> device_totals(const GroundTruth& truth) {
  std::map<std::string, std::size_t> totals;
  for (const auto& [video, device] : truth) ++totals[device];
  return totals;
}

GroupTpr group_tpr(std::span<const std::string> cluster, const GroundTruth& truth, const TprOptions& options) {
  if (cluster.empty()) throw Error(ErrorKind::Range, kModule, "empty cluster");
  std::map<std::string, std::size_t> counts;
  for (const auto& id : cluster) ++counts[device_of(truth, id)];

  GroupTpr g;
  g.members = cluster.size();
  g.pure = counts.size() == 1;
  for (const auto& [device, count] : counts) {
    if (count > g.hits) {
      g.device = device;
      g.hits = count;
    }
  }
  if (options.fixed_denominator) {
    if (*options.fixed_denominator == 0) throw Error(ErrorKind::Range, kModule, "denominator must be positive");
    g.denominator = *options.fixed_denominator;
  } else {
    g.denominator = device_totals(truth).at(g.device);
  }
  if (!g.pure && !options.majority) g.hits = 0;
  g.percent = 100.0 * static_cast<double>(g.hits) / static_cast<double>(g.denominator);
  return g;
}

TprSummary average_tpr(std::span<const std::vector<std::string>> clusters, const GroundTruth& truth,
                       const TprOptions& options) {
  if (clusters.empty()) throw Error(ErrorKind::Range, kModule, "no clusters");
  std::set<std::string> seen;
  TprSummary summary;
  double total = 0.0;
  for (const auto& cluster : clusters) {
    for (const auto& id : cluster)
      if (!seen.insert(id).second) throw Error(ErrorKind::Label, kModule, "video '" + id + "' is in two clusters");
    summary.groups.push_back(group_tpr(cluster, truth, options));
    total += summary.groups.back().percent;
  }
  summary.average = total / static_cast<double>(clusters.size());
  return summary;
}

RocResult roc_from_scores(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty())
    throw Error(ErrorKind::DegenerateLabels, kModule,
                "ROC needs both positive and negative pairs (" + std::to_string(positives.size()) + " positive, " +
                    std::to_string(negatives.size()) + " negative)");
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(positives.size() + negatives.size());
  for (double s : positives) scored.emplace_back(s, true);
  for (double s : negatives) scored.emplace_back(s, false);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const std::uint64_t p = positives.size();
  const std::uint64_t n = negatives.size();
  RocResult roc;
  roc.positives = p;
  roc.negatives = n;
  roc.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  // Twice the area in units of 1/(p*n); exact in integers.
  std::uint64_t area2 = 0;
  for (std::size_t i = 0; i < scored.size();) {
    const std::uint64_t tp0 = tp, fp0 = fp;
    const double t = scored[i].first;
    for (; i < scored.size() && scored[i].first == t; ++i) (scored[i].second ? tp : fp) += 1;
    area2 += (fp - fp0) * (tp + tp0);
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(n), static_cast<double>(tp) / static_cast<double>(p)});
  }
  roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
  return roc;
}

double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty())
    throw Error(ErrorKind::DegenerateLabels, kModule, "need positive and negative scores");
  std::vector<double> neg(negatives.begin(), negatives.end());
  std::sort(neg.begin(), neg.end());
  std::uint64_t twice = 0;
  for (double s : positives) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
    const auto hi = std::upper_bound(lo, neg.end(), s);
    twice += 2 * static_cast<std::uint64_t>(lo - neg.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice) /
         (2.0 * static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

RocResult roc_auc(const SimilarityMatrix& sim, const GroundTruth& truth) {
  std::vector<const std::string*> devices;
  devices.reserve(sim.size());
  for (const auto& id : sim.ids) devices.push_back(&device_of(truth, id));
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < sim.size(); ++i)
    for (std::size_t j = i + 1; j < sim.size(); ++j) (*devices[i] == *devices[j] ? pos : neg).push_back(sim(i, j));
  return roc_from_scores(pos, neg);
}

EvalReport evaluate(std::span<const std::vector<std::string>> clusters, const GroundTruth& truth,
                    const SimilarityMatrix* sim, const TprOptions& options) {
  EvalReport report;
  report.tpr = average_tpr(clusters, truth, options);
  report.tpr_rule = options.majority ? "majority" : "pure";
  if (sim) report.roc = roc_auc(*sim, truth);
  return report;
}

std::string report_to_json(const EvalReport& report, std::span<const std::vector<std::string>> clusters) {
  nlohmann::ordered_json j;
  j["k"] = report.tpr.groups.size();
  j["tpr_rule"] = report.tpr_rule;
  auto groups = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < report.tpr.groups.size(); ++g) {
    const auto& r = report.tpr.groups[g];
    nlohmann::ordered_json e;
    e["group"] = "G" + std::to_string(g + 1);
    e["device"] = r.device;
    e["members"] = r.members;
    e["pure"] = r.pure;
    e["hits"] = r.hits;
    e["denominator"] = r.denominator;
    e["tpr"] = round_to(r.percent, 10.0);
    if (g < clusters.size()) e["videos"] = clusters[g];
    groups.push_back(std::move(e));
  }
  j["groups"] = std::move(groups);
  j["average_tpr"] = round_to(report.tpr.average, 10.0);
  if (report.roc) {
    j["auc"] = round_to(report.roc->auc, 1e9);
    j["positive_pairs"] = report.roc->positives;
    j["negative_pairs"] = report.roc->negatives;
  } else {
    j["auc"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string roc_to_csv(const RocResult& roc) {
  std::string out = "fpr,tpr\n";
  char buf[64];
  for (const auto& p : roc.points) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.fpr, p.tpr);
    out += buf;
  }
  return out;
}

}  // namespace vidprnu
