#include "vidprnu/denoise.hpp"

#include <algorithm>
#include <utility>

#include "vidprnu/error.hpp"
#include "vidprnu/wavelet.hpp"

namespace vidprnu {

namespace {
constexpr const char* kModule = "denoise";
}

void DenoiserParams::validate() const {
  if (!(noise_floor_variance > 0.0))
    throw Error(ErrorKind::Config, kModule, "noise floor variance must be positive");
  if (levels < 1 || levels > 16) throw Error(ErrorKind::Config, kModule, "levels must be in [1, 16]");
  if (window_sizes.empty()) throw Error(ErrorKind::Config, kModule, "at least one window size is required");
  for (std::size_t w : window_sizes)
    if (w < 3 || w % 2 == 0)
      throw Error(ErrorKind::Config, kModule, "window size " + std::to_string(w) + " must be odd and >= 3");
}

WaveletWienerDenoiser::WaveletWienerDenoiser(DenoiserParams params, kernels::Backend backend)
    : params_(std::move(params)), backend_(backend) {
  params_.validate();
}

Plane<float> WaveletWienerDenoiser::denoise(const LumaFrame& frame) const {
  const std::size_t largest_window = *std::max_element(params_.window_sizes.begin(), params_.window_sizes.end());
  if (frame.width() < largest_window || frame.height() < largest_window)
    throw Error(ErrorKind::Size, kModule,
                "frame " + std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                    " is smaller than the " + std::to_string(largest_window) + "x" +
                    std::to_string(largest_window) + " window");

  Plane<float> coeffs = wavelet::mirror_pad(frame, std::size_t{1} << params_.levels);
  wavelet::decompose(coeffs, params_.levels, backend_);

  const std::size_t stride = coeffs.width();
  float* base = coeffs.values().data();
  for (std::size_t l = 1; l <= params_.levels; ++l) {
    const std::size_t w = coeffs.width() >> l;
    const std::size_t h = coeffs.height() >> l;
    // HL (top right), LH (bottom left), HH (bottom right) of this level.
    const kernels::Region bands[] = {
        {base + w, stride, w, h},
        {base + h * stride, stride, w, h},
        {base + h * stride + w, stride, w, h},
    };
    for (const auto& band : bands) {
      if (backend_ == kernels::Backend::Serial)
        kernels::serial::wiener_band(band, params_.window_sizes, params_.noise_floor_variance);
      else
        kernels::omp::wiener_band(band, params_.window_sizes, params_.noise_floor_variance);
    }
  }

  wavelet::reconstruct(coeffs, params_.levels, backend_);

  Plane<float> out(frame.width(), frame.height());
  for (std::size_t y = 0; y < frame.height(); ++y) {
    auto src = coeffs.row(y);
    std::copy_n(src.begin(), frame.width(), out.row(y).begin());
  }
  return out;
}

std::vector<std::string> denoiser_names() { return {"wavelet-wiener"}; }

std::unique_ptr<Denoiser> make_denoiser(std::string_view name, const DenoiserParams& params) {
  if (name == "wavelet-wiener") return std::make_unique<WaveletWienerDenoiser>(params);
  throw Error(ErrorKind::Config, kModule, "unknown denoiser '" + std::string(name) + "'");
}

Plane<float> denoise_frame(const LumaFrame& frame, const DenoiserParams& params) {
  return WaveletWienerDenoiser(params).denoise(frame);
}

NoiseResidual residual(const LumaFrame& frame, const Denoiser& denoiser) {
  Plane<float> clean = denoiser.denoise(frame);
  NoiseResidual w(frame.width(), frame.height());
  auto src = frame.values();
  auto den = clean.values();
  auto out = w.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(src[i]) - den[i];
  return w;
}

NoiseResidual residual(const LumaFrame& frame, const DenoiserParams& params) {
  return residual(frame, WaveletWienerDenoiser(params));
}

}  // namespace vidprnu
