#include <omp.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "kernels_detail.hpp"
#include "vidprnu/kernels.hpp"

namespace vidprnu::kernels {

void set_thread_count(int threads) {
  omp_set_max_active_levels(1);
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
}

int thread_count() { return omp_get_max_threads(); }

namespace omp {

namespace {

using Index = std::ptrdiff_t;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

std::size_t block_count(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

}  // namespace

void dwt2_level(Region region, std::span<const double> lowpass) {
  const std::size_t taps = lowpass.size();
  const std::size_t longest = std::max(region.width, region.height);
#pragma omp parallel
  {
    std::vector<float> line(longest), out(longest);
    std::vector<double> scratch(longest + taps);
#pragma omp for schedule(static)
    for (Index y = 0; y < as_index(region.height); ++y) {
      float* row = region.row(static_cast<std::size_t>(y));
      detail::analyze_line(row, region.width, out.data(), lowpass, scratch.data());
      std::copy_n(out.data(), region.width, row);
    }
#pragma omp for schedule(static)
    for (Index x = 0; x < as_index(region.width); ++x) {
      for (std::size_t y = 0; y < region.height; ++y) line[y] = region.row(y)[x];
      detail::analyze_line(line.data(), region.height, out.data(), lowpass, scratch.data());
      for (std::size_t y = 0; y < region.height; ++y) region.row(y)[x] = out[y];
    }
  }
}

void idwt2_level(Region region, std::span<const double> lowpass) {
  const std::size_t taps = lowpass.size();
  const std::size_t longest = std::max(region.width, region.height);
#pragma omp parallel
  {
    std::vector<float> line(longest), out(longest);
    std::vector<double> scratch(longest + taps);
#pragma omp for schedule(static)
    for (Index x = 0; x < as_index(region.width); ++x) {
      for (std::size_t y = 0; y < region.height; ++y) line[y] = region.row(y)[x];
      detail::synthesize_line(line.data(), region.height, out.data(), lowpass, scratch.data());
      for (std::size_t y = 0; y < region.height; ++y) region.row(y)[x] = out[y];
    }
#pragma omp for schedule(static)
    for (Index y = 0; y < as_index(region.height); ++y) {
      float* row = region.row(static_cast<std::size_t>(y));
      detail::synthesize_line(row, region.width, out.data(), lowpass, scratch.data());
      std::copy_n(out.data(), region.width, row);
    }
  }
}

void wiener_band(Region band, std::span<const std::size_t> windows, double noise_var) {
  const std::size_t s = band.width + 1;
  std::vector<double> sat(s * (band.height + 1), 0.0);
#pragma omp parallel
  {
    // Row prefix sums, then column prefix sums; each line is owned by one thread.
#pragma omp for schedule(static)
    for (Index y = 0; y < as_index(band.height); ++y) {
      const float* row = band.row(static_cast<std::size_t>(y));
      double* dst = sat.data() + (static_cast<std::size_t>(y) + 1) * s;
      double running = 0.0;
      for (std::size_t x = 0; x < band.width; ++x) {
        running += static_cast<double>(row[x]) * row[x];
        dst[x + 1] = running;
      }
    }
#pragma omp for schedule(static)
    for (Index x = 1; x < as_index(s); ++x)
      for (std::size_t y = 1; y <= band.height; ++y) sat[y * s + x] += sat[(y - 1) * s + x];
#pragma omp for schedule(static)
    for (Index y = 0; y < as_index(band.height); ++y)
      detail::wiener_row(band, sat, windows, noise_var, static_cast<std::size_t>(y));
  }
}

void accumulate_masked(std::span<double> num, std::span<double> den, std::span<const std::uint8_t> luma,
                       std::span<const float> residual, std::span<const std::uint8_t> mask) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < as_index(num.size()); ++i) {
    if (!mask[i]) continue;
    const double intensity = luma[i];
    num[i] += static_cast<double>(residual[i]) * intensity;
    den[i] += intensity * intensity;
  }
}

void finalize_ratio(std::span<const double> num, std::span<const double> den, std::span<float> out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < as_index(out.size()); ++i) out[i] = static_cast<float>(num[i] / (den[i] + 1.0));
}

void enhance_gamma3(std::span<float> values, double alpha) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < as_index(values.size()); ++i) values[i] = static_cast<float>(gamma3(values[i], alpha));
}

double mean(std::span<const float> v) {
  const std::size_t blocks = block_count(v.size());
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < as_index(blocks); ++b) {
    std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
    partial[b] = detail::sum_block(v, begin, std::min(v.size(), begin + kReduceBlock));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(v.size());
}

double center(std::span<const float> v, std::span<float> out) {
  const double m = mean(v);
  const std::size_t blocks = block_count(v.size());
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < as_index(blocks); ++b) {
    std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
    std::size_t end = std::min(v.size(), begin + kReduceBlock);
    double sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = static_cast<float>(v[i] - m);
      sq += static_cast<double>(out[i]) * out[i];
    }
    partial[b] = sq;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return std::sqrt(total);
}

double dot(std::span<const float> a, std::span<const float> b) {
  const std::size_t blocks = block_count(a.size());
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < as_index(blocks); ++k) {
    std::size_t begin = static_cast<std::size_t>(k) * kReduceBlock;
    partial[k] = detail::dot_block(a.data(), b.data(), begin, std::min(a.size(), begin + kReduceBlock));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void gram_upper(std::span<const float> vectors, std::size_t count, std::size_t length, std::span<double> out) {
  if (count < 2) return;
  const std::size_t pairs = count * (count - 1) / 2;
#pragma omp parallel for schedule(dynamic)
  for (Index p = 0; p < as_index(pairs); ++p) {
    // Unrank p into (i, j), i < j, row-major over the upper triangle.
    std::size_t rest = static_cast<std::size_t>(p);
    std::size_t i = 0;
    while (rest >= count - 1 - i) {
      rest -= count - 1 - i;
      ++i;
    }
    std::size_t j = i + 1 + rest;
    out[i * count + j] = detail::blocked_dot(vectors.data() + i * length, vectors.data() + j * length, length);
  }
}

}  // namespace omp
}  // namespace vidprnu::kernels
