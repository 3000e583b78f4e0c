#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/coeffxml.hpp"
#include "vidprnu/denoise.hpp"
#include "vidprnu/frameio.hpp"
#include "vidprnu/plane.hpp"

namespace vidprnu {

struct FingerprintMeta {
  std::string video_id;
  std::uint32_t frame_count = 0;
  std::string enhancer;          // empty unless enhanced
  std::optional<double> alpha;   // set iff enhanced
};

/// Per-video sensor fingerprint estimate, optionally enhanced.
struct Fingerprint {
  Plane<float> values;
  bool enhanced = false;
  FingerprintMeta meta;

  std::size_t width() const noexcept { return values.width(); }
  std::size_t height() const noexcept { return values.height(); }
};

struct EnhancerParams {
  std::string model = "gamma3";
  double alpha = 20.0;

  void validate() const;
};

/// Alpha grid available for parameter sweeps.
inline constexpr std::array<double, 5> kAlphaSweep{2.0, 5.0, 7.0, 20.0, 50.0};

/// True when any coefficient matrix of the macroblock has a nonzero entry
/// other than its (0,0) DC term.
bool macroblock_alive(const MacroblockRecord& mb);

/// Survival mask of one frame: each macroblock's 16x16 footprint (clipped at
/// the frame edge) is 1 iff the block is alive. Pixels not covered by any
/// record are 0.
FrameMask build_mask(const FrameCoeffs& coeffs, std::size_t width, std::size_t height);

VideoMask build_video_mask(std::span<const FrameCoeffs> coeffs, std::size_t width, std::size_t height);

/// Running sums of the masked estimator
///   K = sum_j W_j I_j M_j / (sum_j (I_j M_j)^2 + 1)
/// with 64-bit accumulators. Frames may be added one at a time.
class FingerprintAccumulator {
 public:
  FingerprintAccumulator(std::size_t width, std::size_t height,
                         kernels::Backend backend = kernels::Backend::OpenMP);

  void add(const LumaFrame& frame, const NoiseResidual& residual, const FrameMask& mask);
  std::size_t frame_count() const noexcept { return frames_; }
  /// Throws Error(EmptyVideo) when no frame was added.
  Fingerprint finish(std::string video_id = {}) const;

 private:
  std::size_t width_;
  std::size_t height_;
  kernels::Backend backend_;
  std::size_t frames_ = 0;
  std::vector<double> numerator_;
  std::vector<double> denominator_;
};

Fingerprint aggregate(std::span<const LumaFrame> frames, std::span<const NoiseResidual> residuals,
                      const VideoMask& masks, kernels::Backend backend = kernels::Backend::OpenMP);

std::vector<std::string> enhancer_names();

/// Applies the named enhancer elementwise. Throws Error(State) if `fp` is
/// already enhanced.
Fingerprint enhance(const Fingerprint& fp, const EnhancerParams& params);

/// Denoise every frame, build its mask, aggregate, and optionally enhance.
Fingerprint extract_video_fingerprint(const VideoFrameSet& set, const Denoiser& denoiser,
                                      const std::optional<EnhancerParams>& enhancer, std::string video_id = {});
Fingerprint extract_video_fingerprint(const VideoFrameSet& set, const DenoiserParams& params,
                                      const std::optional<EnhancerParams>& enhancer, std::string video_id = {});

// Fingerprint files: "VFP1", u32 width, u32 height, u8 enhanced, f32 alpha
// (0 if not enhanced), u32 frame_count, then width*height f32 row-major; all
// little-endian.
std::string encode_fingerprint(const Fingerprint& fp);
Fingerprint decode_fingerprint(std::string_view bytes, std::string video_id = {});
void write_fingerprint(const std::filesystem::path& path, const Fingerprint& fp);
/// The video id defaults to the file stem.
Fingerprint read_fingerprint(const std::filesystem::path& path);

}  // namespace vidprnu
