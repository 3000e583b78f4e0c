#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/similarity.hpp"

namespace vidprnu {

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are 0..n-1 and the cluster created by merge s gets id n+s. `left` is the
/// operand containing the smaller leaf index.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double similarity = 0.0;  // average-linkage similarity at merge time
  std::size_t size = 0;     // leaves in the merged cluster

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::vector<std::string> leaf_ids;
  std::vector<Merge> merges;  // exactly leaf_ids.size() - 1

  std::size_t leaf_count() const noexcept { return leaf_ids.size(); }
  /// Leaves under cluster `id`, ascending.
  std::vector<std::size_t> members(std::size_t id) const;
};

/// Greedy average-linkage agglomeration on a similarity matrix: each step
/// merges the pair (u, v) maximising mean_{i in u, j in v} sim(i, j). Ties go
/// to the lexicographically smallest (min leaf of u, min leaf of v). Pair
/// sums are updated incrementally and each cluster caches its best partner,
/// so a typical run costs O(n^2).
Dendrogram build_dendrogram(const SimilarityMatrix& sim);

/// Undoes the last k-1 merges. Labels are 0..k-1, numbered by each cluster's
/// smallest leaf index. Throws Error(Range) unless 2 <= k <= n.
std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k);

struct SilhouetteReport {
  std::vector<double> scores;      // s(x)
  std::vector<double> cohesion;    // a(x)
  std::vector<double> separation;  // b(x)
  double coefficient = 0.0;        // mean of s(x)
};

/// Distances 1 - sim(i, j), row-major n x n.
std::vector<double> distance_matrix(const SimilarityMatrix& sim);

/// Silhouette of a labelling over a row-major n x n distance matrix. Members
/// of singleton clusters score 0. Throws Error(Range) with fewer than two
/// clusters or a label without members.
SilhouetteReport silhouette(std::span<const std::size_t> labels, std::span<const double> distances);

struct ClusterResult {
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;  // per id
  std::size_t k = 0;
  double silhouette = 0.0;

  /// Member ids grouped by label.
  std::vector<std::vector<std::string>> clusters() const;
};

/// Cuts the dendrogram at every k in [2, n-1] and keeps the cut with the
/// highest silhouette coefficient (smallest k on ties). `fixed_k` skips the
/// search. Throws Error(TooFewItems) for n < 3.
ClusterResult select_clustering(const SimilarityMatrix& sim, std::optional<std::size_t> fixed_k = std::nullopt);

/// {"k": int, "silhouette": float, "clusters": [[id, ...], ...]}
std::string clusters_to_json(const ClusterResult& result);
std::vector<std::vector<std::string>> clusters_from_json(std::string_view text);
void write_clusters(const std::filesystem::path& path, const ClusterResult& result);
std::vector<std::vector<std::string>> read_clusters(const std::filesystem::path& path);

}  // namespace vidprnu
