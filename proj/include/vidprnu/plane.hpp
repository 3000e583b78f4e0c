#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vidprnu {

/// Row-major 2-D sample plane.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}
  Plane(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<T> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_shape(std::size_t w, std::size_t h) const noexcept { return w == width_ && h == height_; }
  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

/// Decoded 8-bit luminance plane of one frame.
using LumaFrame = Plane<std::uint8_t>;
/// Per-frame noise residual W = I - denoise(I).
using NoiseResidual = Plane<float>;
/// Binary survival mask of one frame (0 = compression destroyed the block).
using FrameMask = Plane<std::uint8_t>;
/// Stacked per-frame masks of one video; depth equals the frame count.
using VideoMask = std::vector<FrameMask>;

}  // namespace vidprnu
