#pragma once

// Data-parallel inner loops of the extraction and matching pipeline.
//
// Every kernel exists twice with identical signatures: `serial` is the plain
// reference kept for testing and benchmarking, `omp` is the OpenMP version the
// library calls. The omp kernels partition work into pieces that do not depend
// on the thread count, so their results are identical for any --threads value.
// Elementwise kernels match the serial reference bit for bit; reductions
// (mean, center, dot, gram_upper) agree with it to rounding.

#include <cstddef>
#include <cstdint>
#include <span>

namespace vidprnu::kernels {

/// View of a rectangular region inside a row-major float buffer.
struct Region {
  float* data;
  std::size_t stride;  // elements per buffer row
  std::size_t width;
  std::size_t height;

  float* row(std::size_t y) const { return data + y * stride; }
};

/// Selects the kernel variant a higher-level routine dispatches to.
enum class Backend { Serial, OpenMP };

/// Block length of the omp reductions.
inline constexpr std::size_t kReduceBlock = 16384;

/// Sets the OpenMP team size used by the omp kernels (0 = all cores) and
/// disables nested parallel regions.
void set_thread_count(int threads);
int thread_count();

/// Scalar form of the piecewise exponential enhancer, shared by both variants.
double gamma3(double k, double alpha);

namespace serial {

/// One level of periodic orthogonal 2-D wavelet analysis, in place. Width and
/// height must be even; output quadrants are [LL HL; LH HH].
void dwt2_level(Region region, std::span<const double> lowpass);
/// Exact inverse of dwt2_level.
void idwt2_level(Region region, std::span<const double> lowpass);
/// Locally adaptive Wiener attenuation of one detail band. Local signal
/// variance is the minimum over square windows (clipped at the band edge) of
/// max(0, mean(c^2) - noise_var); each coefficient is scaled by
/// var / (var + noise_var).
void wiener_band(Region band, std::span<const std::size_t> windows, double noise_var);
/// num += W*I*M and den += (I*M)^2, elementwise.
void accumulate_masked(std::span<double> num, std::span<double> den, std::span<const std::uint8_t> luma,
                       std::span<const float> residual, std::span<const std::uint8_t> mask);
/// out = num / (den + 1).
void finalize_ratio(std::span<const double> num, std::span<const double> den, std::span<float> out);
void enhance_gamma3(std::span<float> values, double alpha);
double mean(std::span<const float> v);
/// out = v - mean(v); returns the L2 norm of out.
double center(std::span<const float> v, std::span<float> out);
double dot(std::span<const float> a, std::span<const float> b);
/// Dot products of `count` contiguous vectors of `length` floats, upper
/// triangle only: out[i * count + j] for i < j.
void gram_upper(std::span<const float> vectors, std::size_t count, std::size_t length, std::span<double> out);

}  // namespace serial

namespace omp {

void dwt2_level(Region region, std::span<const double> lowpass);
void idwt2_level(Region region, std::span<const double> lowpass);
void wiener_band(Region band, std::span<const std::size_t> windows, double noise_var);
void accumulate_masked(std::span<double> num, std::span<double> den, std::span<const std::uint8_t> luma,
                       std::span<const float> residual, std::span<const std::uint8_t> mask);
void finalize_ratio(std::span<const double> num, std::span<const double> den, std::span<float> out);
void enhance_gamma3(std::span<float> values, double alpha);
double mean(std::span<const float> v);
double center(std::span<const float> v, std::span<float> out);
double dot(std::span<const float> a, std::span<const float> b);
void gram_upper(std::span<const float> vectors, std::size_t count, std::size_t length, std::span<double> out);

}  // namespace omp

}  // namespace vidprnu::kernels
