#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vidprnu/coeffxml.hpp"
#include "vidprnu/plane.hpp"

namespace vidprnu {

/// Frames of one video paired positionally with their coefficient dumps.
struct VideoFrameSet {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<LumaFrame> frames;
  std::vector<FrameCoeffs> coeffs;

  std::size_t frame_count() const noexcept { return frames.size(); }
};

/// BT.601 luma, rounded to nearest.
std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Reads a binary PGM (P5, maxval <= 255) or an 8-bit PNG (gray, gray+alpha,
/// RGB, RGBA or palette). Color input is reduced to luma.
LumaFrame load_frame(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const LumaFrame& frame);

/// Expands a filename template containing "{index}".
std::string expand_pattern(const std::string& pattern, std::size_t index);

/// Loads the numbered frames matching `pattern` inside `directory`. Numbering
/// starts at 0 or 1 and must be gapless; zero-padded indices are accepted.
std::vector<LumaFrame> load_frame_sequence(const std::filesystem::path& directory, const std::string& pattern);

/// Pairs the k-th frame with the k-th coefficient dump. In strict mode every
/// dump must cover exactly the frame's macroblock grid.
VideoFrameSet align(std::vector<LumaFrame> frames, std::vector<FrameCoeffs> coeffs, bool strict = true);

}  // namespace vidprnu
