#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/kernels.hpp"
#include "vidprnu/plane.hpp"

namespace vidprnu {

struct DenoiserParams {
  double noise_floor_variance = 9.0;  // sigma_0^2 on the 0-255 scale
  std::size_t levels = 4;
  std::vector<std::size_t> window_sizes{3, 5, 7, 9};

  /// Throws Error(Config) unless variance > 0, levels >= 1 and all windows
  /// are odd and >= 3.
  void validate() const;
};

/// Extraction filter interface. Implementations must be pure functions of
/// the frame so frames can be processed concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::string_view name() const = 0;
  virtual Plane<float> denoise(const LumaFrame& frame) const = 0;
};

/// Wavelet-domain locally adaptive Wiener filter: mirror-pad to a multiple of
/// 2^levels, decompose with the 8-tap Daubechies wavelet, attenuate every
/// detail band, keep the approximation band, reconstruct and crop.
class WaveletWienerDenoiser final : public Denoiser {
 public:
  explicit WaveletWienerDenoiser(DenoiserParams params, kernels::Backend backend = kernels::Backend::OpenMP);

  std::string_view name() const override { return "wavelet-wiener"; }
  Plane<float> denoise(const LumaFrame& frame) const override;
  const DenoiserParams& params() const noexcept { return params_; }

 private:
  DenoiserParams params_;
  kernels::Backend backend_;
};

std::vector<std::string> denoiser_names();
std::unique_ptr<Denoiser> make_denoiser(std::string_view name, const DenoiserParams& params);

Plane<float> denoise_frame(const LumaFrame& frame, const DenoiserParams& params);

/// W = float(I) - denoise(I).
NoiseResidual residual(const LumaFrame& frame, const Denoiser& denoiser);
NoiseResidual residual(const LumaFrame& frame, const DenoiserParams& params);

}  // namespace vidprnu
