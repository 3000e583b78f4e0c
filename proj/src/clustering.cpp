#include "vidprnu/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "clustering";
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Active clusters are indexed by their smallest leaf, so comparing indices is
// the lexicographic tie-break on (min leaf of u, min leaf of v).
class Agglomerator {
 public:
  explicit Agglomerator(const SimilarityMatrix& sim)
      : n_(sim.size()), sums_(sim.values), sizes_(n_, 1), active_(n_, true), cluster_id_(n_),
        best_(n_, kNone), best_value_(n_, -std::numeric_limits<double>::infinity()) {
    std::iota(cluster_id_.begin(), cluster_id_.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_; ++i) rescan(i);
  }

  std::vector<Merge> run() {
    std::vector<Merge> merges;
    merges.reserve(n_ - 1);
    for (std::size_t step = 0; step + 1 < n_; ++step) {
      std::size_t a = kNone;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!active_[i] || best_[i] == kNone) continue;
        if (a == kNone || best_value_[i] > best_value_[a]) a = i;
      }
      const std::size_t b = best_[a];
      merges.push_back({cluster_id_[a], cluster_id_[b], best_value_[a], sizes_[a] + sizes_[b]});
      merge(a, b, n_ + step);
    }
    return merges;
  }

 private:
  double linkage(std::size_t i, std::size_t j) const {
    return sums_[i * n_ + j] / static_cast<double>(sizes_[i] * sizes_[j]);
  }

  // Best partner j > i, ties to the smallest j.
  void rescan(std::size_t i) {
    best_[i] = kNone;
    best_value_[i] = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (!active_[j]) continue;
      double d = linkage(i, j);
      if (best_[i] == kNone || d > best_value_[i]) {
        best_[i] = j;
        best_value_[i] = d;
      }
    }
  }

  void merge(std::size_t a, std::size_t b, std::size_t new_id) {
    active_[b] = false;
    sizes_[a] += sizes_[b];
    cluster_id_[a] = new_id;
    for (std::size_t x = 0; x < n_; ++x) {
      if (!active_[x] || x == a) continue;
      const double s = sums_[a * n_ + x] + sums_[b * n_ + x];
      sums_[a * n_ + x] = s;
      sums_[x * n_ + a] = s;
    }
    rescan(a);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!active_[i] || i == a) continue;
      if (best_[i] == a || best_[i] == b) {
        rescan(i);
      } else if (i < a) {
        // Only the (i, a) entry of row i changed.
        const double d = linkage(i, a);
        if (best_[i] == kNone || d > best_value_[i] || (d == best_value_[i] && a < best_[i])) {
          best_[i] = a;
          best_value_[i] = d;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<double> sums_;
  std::vector<std::size_t> sizes_;
  std::vector<bool> active_;
  std::vector<std::size_t> cluster_id_;
  std::vector<std::size_t> best_;
  std::vector<double> best_value_;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::vector<std::size_t> Dendrogram::members(std::size_t id) const {
  const std::size_t n = leaf_count();
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{id};
  while (!stack.empty()) {
    std::size_t c = stack.back();
    stack.pop_back();
    if (c < n) {
      out.push_back(c);
    } else {
      const Merge& m = merges.at(c - n);
      stack.push_back(m.left);
      stack.push_back(m.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dendrogram build_dendrogram(const SimilarityMatrix& sim) {
  check_symmetric(sim);
  if (sim.size() < 2) throw Error(ErrorKind::TooFewItems, kModule, "need at least two items");
  Dendrogram d;
  d.leaf_ids = sim.ids;
  d.merges = Agglomerator(sim).run();
  return d;
}

std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaf_count();
  if (k < 2 || k > n)
    throw Error(ErrorKind::Range, kModule, "k=" + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  // Union-find over cluster ids 0..2n-2; applying the first n-k merges.
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t s = 0; s < n - k; ++s) {
    const Merge& m = dendrogram.merges[s];
    parent[find_root(parent, m.left)] = n + s;
    parent[find_root(parent, m.right)] = n + s;
  }
  std::vector<std::size_t> labels(n);
  std::vector<std::size_t> label_of_root(2 * n - 1, kNone);
  std::size_t next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    std::size_t root = find_root(parent, leaf);
    if (label_of_root[root] == kNone) label_of_root[root] = next++;
    labels[leaf] = label_of_root[root];
  }
  return labels;
}

std::vector<double> distance_matrix(const SimilarityMatrix& sim) {
  const std::size_t n = sim.size();
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = i == j ? 0.0 : 1.0 - sim(i, j);
  return dist;
}

SilhouetteReport silhouette(std::span<const std::size_t> labels, std::span<const double> distances) {
  const std::size_t n = labels.size();
  if (distances.size() != n * n)
    throw Error(ErrorKind::Shape, kModule, "distance matrix does not match " + std::to_string(n) + " labels");
  const std::size_t k = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (k < 2) throw Error(ErrorKind::Range, kModule, "silhouette needs at least two clusters");
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t l : labels) ++counts[l];
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] == 0) throw Error(ErrorKind::Range, kModule, "cluster " + std::to_string(c) + " is empty");

  SilhouetteReport report;
  report.scores.resize(n);
  report.cohesion.resize(n);
  report.separation.resize(n);
  std::vector<double> per_cluster(k);
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(per_cluster.begin(), per_cluster.end(), 0.0);
    for (std::size_t y = 0; y < n; ++y)
      if (y != x) per_cluster[labels[y]] += distances[x * n + y];
    const std::size_t own = labels[x];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own) b = std::min(b, per_cluster[c] / static_cast<double>(counts[c]));
    report.separation[x] = b;
    if (counts[own] == 1) {
      report.cohesion[x] = 0.0;
      report.scores[x] = 0.0;
    } else {
      const double a = per_cluster[own] / static_cast<double>(counts[own] - 1);
      report.cohesion[x] = a;
      const double denom = std::max(a, b);
      report.scores[x] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    total += report.scores[x];
  }
  report.coefficient = total / static_cast<double>(n);
  return report;
}

std::vector<std::vector<std::string>> ClusterResult::clusters() const {
  std::vector<std::vector<std::string>> out(k);
  for (std::size_t i = 0; i < ids.size(); ++i) out[labels[i]].push_back(ids[i]);
  return out;
}

ClusterResult select_clustering(const SimilarityMatrix& sim, std::optional<std::size_t> fixed_k) {
  const std::size_t n = sim.size();
  if (n < 3) throw Error(ErrorKind::TooFewItems, kModule, "need at least 3 items to select a clustering, got " + std::to_string(n));
  if (fixed_k && (*fixed_k < 2 || *fixed_k > n - 1))
    throw Error(ErrorKind::Range, kModule,
                "k=" + std::to_string(*fixed_k) + " outside [2, " + std::to_string(n - 1) + "]");

  const Dendrogram dendrogram = build_dendrogram(sim);
  const std::vector<double> dist = distance_matrix(sim);
  const std::size_t k_lo = fixed_k ? *fixed_k : 2;
  const std::size_t k_hi = fixed_k ? *fixed_k : n - 1;
  std::vector<double> scores(k_hi - k_lo + 1);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(scores.size()); ++i) {
    const auto labels = cut(dendrogram, k_lo + static_cast<std::size_t>(i));
    scores[i] = silhouette(labels, dist).coefficient;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;

  ClusterResult result;
  result.ids = sim.ids;
  result.k = k_lo + best;
  result.labels = cut(dendrogram, result.k);
  result.silhouette = scores[best];
  return result;
}

std::string clusters_to_json(const ClusterResult& result) {
  nlohmann::ordered_json j;
  j["k"] = result.k;
  j["silhouette"] = result.silhouette;
  j["clusters"] = result.clusters();
  return j.dump(2) + "\n";
}

std::vector<std::vector<std::string>> clusters_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    auto clusters = j.at("clusters").get<std::vector<std::vector<std::string>>>();
    if (j.contains("k") && j.at("k").get<std::size_t>() != clusters.size())
      throw Error(ErrorKind::Format, kModule, "\"k\" does not match the number of clusters");
    return clusters;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, kModule, std::string("invalid clusters file: ") + e.what());
  }
}

void write_clusters(const std::filesystem::path& path, const ClusterResult& result) {
  write_file_atomic(path, clusters_to_json(result), kModule);
}

std::vector<std::vector<std::string>> read_clusters(const std::filesystem::path& path) {
  return clusters_from_json(read_file(path, kModule));
}

}  // namespace vidprnu
