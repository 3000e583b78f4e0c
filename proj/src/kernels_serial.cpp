#include <cmath>
#include <vector>

#include "kernels_detail.hpp"
#include "vidprnu/kernels.hpp"

namespace vidprnu::kernels {

double gamma3(double k, double alpha) {
  if (k >= 0.0) {
    if (k <= alpha) return 1.0 - std::exp(-k);
    return (1.0 - std::exp(-alpha)) * std::exp(alpha - k);
  }
  if (k >= -alpha) return -1.0 + std::exp(k);
  return (-1.0 + std::exp(-alpha)) * std::exp(alpha + k);
}

namespace serial {

void dwt2_level(Region region, std::span<const double> lowpass) {
  const std::size_t taps = lowpass.size();
  std::vector<float> line(std::max(region.width, region.height));
  std::vector<float> out(line.size());
  std::vector<double> scratch(line.size() + taps);
  for (std::size_t y = 0; y < region.height; ++y) {
    float* row = region.row(y);
    detail::analyze_line(row, region.width, out.data(), lowpass, scratch.data());
    std::copy_n(out.data(), region.width, row);
  }
  for (std::size_t x = 0; x < region.width; ++x) {
    for (std::size_t y = 0; y < region.height; ++y) line[y] = region.row(y)[x];
    detail::analyze_line(line.data(), region.height, out.data(), lowpass, scratch.data());
    for (std::size_t y = 0; y < region.height; ++y) region.row(y)[x] = out[y];
  }
}

void idwt2_level(Region region, std::span<const double> lowpass) {
  const std::size_t taps = lowpass.size();
  std::vector<float> line(std::max(region.width, region.height));
  std::vector<float> out(line.size());
  std::vector<double> scratch(line.size() + taps);
  for (std::size_t x = 0; x < region.width; ++x) {
    for (std::size_t y = 0; y < region.height; ++y) line[y] = region.row(y)[x];
    detail::synthesize_line(line.data(), region.height, out.data(), lowpass, scratch.data());
    for (std::size_t y = 0; y < region.height; ++y) region.row(y)[x] = out[y];
  }
  for (std::size_t y = 0; y < region.height; ++y) {
    float* row = region.row(y);
    detail::synthesize_line(row, region.width, out.data(), lowpass, scratch.data());
    std::copy_n(out.data(), region.width, row);
  }
}

void wiener_band(Region band, std::span<const std::size_t> windows, double noise_var) {
  const std::size_t s = band.width + 1;
  std::vector<double> sat(s * (band.height + 1), 0.0);
  for (std::size_t y = 0; y < band.height; ++y) {
    const float* row = band.row(y);
    double running = 0.0;
    for (std::size_t x = 0; x < band.width; ++x) {
      running += static_cast<double>(row[x]) * row[x];
      sat[(y + 1) * s + x + 1] = sat[y * s + x + 1] + running;
    }
  }
  for (std::size_t y = 0; y < band.height; ++y) detail::wiener_row(band, sat, windows, noise_var, y);
}

void accumulate_masked(std::span<double> num, std::span<double> den, std::span<const std::uint8_t> luma,
                       std::span<const float> residual, std::span<const std::uint8_t> mask) {
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (!mask[i]) continue;
    const double intensity = luma[i];
    num[i] += static_cast<double>(residual[i]) * intensity;
    den[i] += intensity * intensity;
  }
}

void finalize_ratio(std::span<const double> num, std::span<const double> den, std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(num[i] / (den[i] + 1.0));
}

void enhance_gamma3(std::span<float> values, double alpha) {
  for (float& v : values) v = static_cast<float>(gamma3(v, alpha));
}

double mean(std::span<const float> v) {
  return detail::sum_block(v, 0, v.size()) / static_cast<double>(v.size());
}

double center(std::span<const float> v, std::span<float> out) {
  const double m = mean(v);
  double sq = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i] - m);
    sq += static_cast<double>(out[i]) * out[i];
  }
  return std::sqrt(sq);
}

double dot(std::span<const float> a, std::span<const float> b) {
  return detail::dot_block(a.data(), b.data(), 0, a.size());
}

void gram_upper(std::span<const float> vectors, std::size_t count, std::size_t length, std::span<double> out) {
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      out[i * count + j] = detail::dot_block(vectors.data() + i * length, vectors.data() + j * length, 0, length);
}

}  // namespace serial
}  // namespace vidprnu::kernels
