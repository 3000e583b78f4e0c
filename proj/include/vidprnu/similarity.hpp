#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/fingerprint.hpp"
#include "vidprnu/kernels.hpp"

namespace vidprnu {

/// Symmetric pairwise correlation matrix with unit diagonal.
struct SimilarityMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major n x n

  std::size_t size() const noexcept { return ids.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }
};

/// Normalized correlation of the mean-centred, row-major flattened inputs,
/// clamped to [-1, 1]. Throws Error(Shape) on length mismatch or fewer than two
/// elements, Error(Degenerate) when either input is constant.
double correlation(std::span<const float> a, std::span<const float> b);
double correlation(const Fingerprint& a, const Fingerprint& b);

/// All pairwise correlations. Requires at least two fingerprints of equal size.
SimilarityMatrix build_matrix(std::span<const Fingerprint> fps, kernels::Backend backend = kernels::Backend::OpenMP);

/// Throws Error(Matrix) unless the matrix is square, finite and exactly symmetric.
void check_symmetric(const SimilarityMatrix& sim);

/// CSV: header row of ids, then n rows of n values with 9 significant digits.
std::string matrix_to_csv(const SimilarityMatrix& sim);
SimilarityMatrix matrix_from_csv(std::string_view text);
void write_matrix(const std::filesystem::path& path, const SimilarityMatrix& sim);
SimilarityMatrix read_matrix(const std::filesystem::path& path);

}  // namespace vidprnu
