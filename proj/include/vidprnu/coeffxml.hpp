#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidprnu {

inline constexpr std::size_t kMacroblockSize = 16;

enum class SliceType { I, P, B };

std::string_view to_string(SliceType type);

/// Integer coefficient matrix of one transform block. Any r x c size is
/// accepted; entry (0,0) is the DC term.
struct CoeffMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> values;  // row-major

  std::int32_t at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  friend bool operator==(const CoeffMatrix&, const CoeffMatrix&) = default;
};

struct MacroblockRecord {
  std::int64_t index = 0;  // the `num` attribute; advisory only
  std::size_t x = 0;
  std::size_t y = 0;
  std::string pred_mode;
  std::vector<CoeffMatrix> coeffs;

  friend bool operator==(const MacroblockRecord&, const MacroblockRecord&) = default;
};

struct FrameCoeffs {
  std::int64_t picture_id = 0;
  std::int64_t poc = 0;
  SliceType slice_type = SliceType::I;
  std::vector<MacroblockRecord> macroblocks;

  friend bool operator==(const FrameCoeffs&, const FrameCoeffs&) = default;
};

struct ParseOptions {
  /// When set, a macroblock count different from the grid size is an error;
  /// otherwise it is reported through `warnings` and the missing blocks are
  /// treated as dead by the mask builder.
  bool strict = true;
  std::vector<std::string>* warnings = nullptr;
};

/// Number of 16x16 macroblocks covering a width x height frame.
std::size_t macroblock_grid_size(std::size_t width, std::size_t height);

/// Parses the decoder's macroblock dump. One FrameCoeffs per <Picture>, in
/// document order. Pictures may appear at top level or inside any wrapper.
std::vector<FrameCoeffs> parse_coeff_dump(std::string_view source, std::size_t expected_width,
                                          std::size_t expected_height,
                                          const ParseOptions& options = {});

std::vector<FrameCoeffs> load_coeff_dump(const std::string& path, std::size_t expected_width,
                                         std::size_t expected_height,
                                         const ParseOptions& options = {});

/// Writes frames in the same schema, wrapped in a <Video> root element.
std::string serialize_coeff_dump(std::span<const FrameCoeffs> frames);

struct SliceHistogram {
  std::size_t i = 0;
  std::size_t p = 0;
  std::size_t b = 0;

  std::size_t total() const { return i + p + b; }
  friend bool operator==(const SliceHistogram&, const SliceHistogram&) = default;
};

SliceHistogram slice_type_histogram(std::span<const FrameCoeffs> frames);

}  // namespace vidprnu
