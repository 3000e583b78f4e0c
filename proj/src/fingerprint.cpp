#include "vidprnu/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <utility>

#include "vidprnu/error.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "fingerprint";

// Frames denoised concurrently before being folded into the sums in order.
constexpr std::size_t kFrameBatch = 16;

}  // namespace

void EnhancerParams::validate() const {
  auto names = enhancer_names();
  if (std::find(names.begin(), names.end(), model) == names.end())
    throw Error(ErrorKind::Config, kModule, "unknown enhancer '" + model + "'");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::Config, kModule, "alpha must be positive and finite");
}

bool macroblock_alive(const MacroblockRecord& mb) {
  for (const auto& m : mb.coeffs)
    for (std::size_t i = 1; i < m.values.size(); ++i)
      if (m.values[i] != 0) return true;
  return false;
}

FrameMask build_mask(const FrameCoeffs& coeffs, std::size_t width, std::size_t height) {
  FrameMask mask(width, height, 0);
  for (const auto& mb : coeffs.macroblocks) {
    if (!macroblock_alive(mb)) continue;
    const std::size_t x_end = std::min(width, mb.x + kMacroblockSize);
    const std::size_t y_end = std::min(height, mb.y + kMacroblockSize);
    for (std::size_t y = mb.y; y < y_end; ++y)
      for (std::size_t x = mb.x; x < x_end; ++x) mask(x, y) = 1;
  }
  return mask;
}

VideoMask build_video_mask(std::span<const FrameCoeffs> coeffs, std::size_t width, std::size_t height) {
  VideoMask masks;
  masks.reserve(coeffs.size());
  for (const auto& c : coeffs) masks.push_back(build_mask(c, width, height));
  return masks;
}

FingerprintAccumulator::FingerprintAccumulator(std::size_t width, std::size_t height, kernels::Backend backend)
    : width_(width), height_(height), backend_(backend), numerator_(width * height, 0.0),
      denominator_(width * height, 0.0) {}

void FingerprintAccumulator::add(const LumaFrame& frame, const NoiseResidual& residual, const FrameMask& mask) {
  if (!frame.same_shape(width_, height_) || !residual.same_shape(width_, height_) ||
      !mask.same_shape(width_, height_))
    throw Error(ErrorKind::Shape, kModule,
                "frame " + std::to_string(frames_) + " does not match the " + std::to_string(width_) + "x" +
                    std::to_string(height_) + " fingerprint");
  if (backend_ == kernels::Backend::Serial)
    kernels::serial::accumulate_masked(numerator_, denominator_, frame.values(), residual.values(), mask.values());
  else
    kernels::omp::accumulate_masked(numerator_, denominator_, frame.values(), residual.values(), mask.values());
  ++frames_;
}

Fingerprint FingerprintAccumulator::finish(std::string video_id) const {
  if (frames_ == 0) throw Error(ErrorKind::EmptyVideo, kModule, "no frames to aggregate");
  Fingerprint fp;
  fp.values = Plane<float>(width_, height_);
  if (backend_ == kernels::Backend::Serial)
    kernels::serial::finalize_ratio(numerator_, denominator_, fp.values.values());
  else
    kernels::omp::finalize_ratio(numerator_, denominator_, fp.values.values());
  fp.meta.video_id = std::move(video_id);
  fp.meta.frame_count = static_cast<std::uint32_t>(frames_);
  return fp;
}

Fingerprint aggregate(std::span<const LumaFrame> frames, std::span<const NoiseResidual> residuals,
                      const VideoMask& masks, kernels::Backend backend) {
  if (frames.size() != residuals.size() || frames.size() != masks.size())
    throw Error(ErrorKind::Shape, kModule,
                "length mismatch: " + std::to_string(frames.size()) + " frames, " +
                    std::to_string(residuals.size()) + " residuals, " + std::to_string(masks.size()) + " masks");
  if (frames.empty()) throw Error(ErrorKind::EmptyVideo, kModule, "no frames to aggregate");
  FingerprintAccumulator acc(frames[0].width(), frames[0].height(), backend);
  for (std::size_t j = 0; j < frames.size(); ++j) acc.add(frames[j], residuals[j], masks[j]);
  return acc.finish();
}

std::vector<std::string> enhancer_names() { return {"gamma3"}; }

Fingerprint enhance(const Fingerprint& fp, const EnhancerParams& params) {
  if (fp.enhanced)
    throw Error(ErrorKind::State, kModule, "fingerprint '" + fp.meta.video_id + "' is already enhanced");
  params.validate();
  Fingerprint out = fp;
  kernels::omp::enhance_gamma3(out.values.values(), params.alpha);
  out.enhanced = true;
  out.meta.enhancer = params.model;
  out.meta.alpha = params.alpha;
  return out;
}

Fingerprint extract_video_fingerprint(const VideoFrameSet& set, const Denoiser& denoiser,
                                      const std::optional<EnhancerParams>& enhancer, std::string video_id) {
  if (set.frames.empty()) throw Error(ErrorKind::EmptyVideo, kModule, "video has no frames");
  if (set.frames.size() != set.coeffs.size())
    throw Error(ErrorKind::Shape, kModule, "frames and coefficient dumps are not aligned");
  if (enhancer) enhancer->validate();

  FingerprintAccumulator acc(set.width, set.height);
  std::vector<NoiseResidual> residuals(kFrameBatch);
  std::vector<FrameMask> masks(kFrameBatch);
  for (std::size_t start = 0; start < set.frames.size(); start += kFrameBatch) {
    const std::size_t count = std::min(kFrameBatch, set.frames.size() - start);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(count); ++k) {
      try {
        const std::size_t j = start + static_cast<std::size_t>(k);
        residuals[k] = residual(set.frames[j], denoiser);
        masks[k] = build_mask(set.coeffs[j], set.width, set.height);
      } catch (...) {
#pragma omp critical(vidprnu_fingerprint_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t k = 0; k < count; ++k) acc.add(set.frames[start + k], residuals[k], masks[k]);
  }

  Fingerprint fp = acc.finish(std::move(video_id));
  if (enhancer) return enhance(fp, *enhancer);
  return fp;
}

Fingerprint extract_video_fingerprint(const VideoFrameSet& set, const DenoiserParams& params,
                                      const std::optional<EnhancerParams>& enhancer, std::string video_id) {
  return extract_video_fingerprint(set, WaveletWienerDenoiser(params), enhancer, std::move(video_id));
}

}  // namespace vidprnu
