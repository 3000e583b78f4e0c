#pragma once

// Line-level helpers shared by the serial and omp kernel variants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vidprnu/kernels.hpp"

namespace vidprnu::kernels::detail {

inline double highpass_tap(std::span<const double> h, std::size_t k) {
  double v = h[h.size() - 1 - k];
  return (k % 2 == 0) ? v : -v;
}

// Periodic analysis of n samples (n even): first n/2 outputs are the
// approximation, the rest the detail. `ext` needs n + taps entries.
inline void analyze_line(const float* in, std::size_t n, float* out, std::span<const double> h, double* ext) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  for (std::size_t m = 0; m < n + taps; ++m) ext[m] = in[m % n];
  double g[32];
  for (std::size_t k = 0; k < taps; ++k) g[k] = highpass_tap(h, k);
  for (std::size_t i = 0; i < half; ++i) {
    const double* x = ext + 2 * i;
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      a += h[k] * x[k];
      d += g[k] * x[k];
    }
    out[i] = static_cast<float>(a);
    out[half + i] = static_cast<float>(d);
  }
}

// Inverse of analyze_line. `acc` needs n + taps entries.
inline void synthesize_line(const float* in, std::size_t n, float* out, std::span<const double> h, double* acc) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  double g[32];
  for (std::size_t k = 0; k < taps; ++k) g[k] = highpass_tap(h, k);
  for (std::size_t m = 0; m < n + taps; ++m) acc[m] = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = in[i];
    const double d = in[half + i];
    double* y = acc + 2 * i;
    for (std::size_t k = 0; k < taps; ++k) y[k] += h[k] * a + g[k] * d;
  }
  for (std::size_t m = n; m < n + taps; ++m) acc[m % n] += acc[m];
  for (std::size_t m = 0; m < n; ++m) out[m] = static_cast<float>(acc[m]);
}

// Summed-area table of squared band coefficients, (w+1) x (h+1).
inline double table_sum(const std::vector<double>& sat, std::size_t w, std::size_t x0, std::size_t y0,
                        std::size_t x1, std::size_t y1) {
  const std::size_t s = w + 1;
  return sat[y1 * s + x1] - sat[y0 * s + x1] - sat[y1 * s + x0] + sat[y0 * s + x0];
}

inline void wiener_row(const Region& band, const std::vector<double>& sat, std::span<const std::size_t> windows,
                       double noise_var, std::size_t y) {
  float* row = band.row(y);
  for (std::size_t x = 0; x < band.width; ++x) {
    double best = INFINITY;
    for (std::size_t win : windows) {
      std::size_t r = win / 2;
      std::size_t x0 = x >= r ? x - r : 0;
      std::size_t y0 = y >= r ? y - r : 0;
      std::size_t x1 = std::min(band.width, x + r + 1);
      std::size_t y1 = std::min(band.height, y + r + 1);
      double local = table_sum(sat, band.width, x0, y0, x1, y1) / static_cast<double>((x1 - x0) * (y1 - y0));
      double var = local - noise_var;
      if (var < 0.0) var = 0.0;
      if (var < best) best = var;
    }
    double gain = best / (best + noise_var);
    row[x] = static_cast<float>(row[x] * gain);
  }
}

inline double sum_block(std::span<const float> v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s;
}

inline double dot_block(const float* a, const float* b, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

// Fixed-partition dot product used by every omp reduction.
inline double blocked_dot(const float* a, const float* b, std::size_t n) {
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += kReduceBlock)
    total += dot_block(a, b, begin, std::min(n, begin + kReduceBlock));
  return total;
}

}  // namespace vidprnu::kernels::detail
