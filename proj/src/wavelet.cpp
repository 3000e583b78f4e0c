#include "vidprnu/wavelet.hpp"

#include <array>

#include "vidprnu/error.hpp"

namespace vidprnu::wavelet {

namespace {

constexpr std::array<double, 8> kDaubechies8 = {
    0.23037781330885523,  0.7148465705525415,   0.6308807679295904,  -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278,
};

void check_divisible(const Plane<float>& plane, std::size_t levels) {
  const std::size_t unit = std::size_t{1} << levels;
  if (levels == 0 || plane.width() % unit != 0 || plane.height() % unit != 0)
    throw Error(ErrorKind::Size, "denoise",
                "plane " + std::to_string(plane.width()) + "x" + std::to_string(plane.height()) +
                    " is not divisible by 2^" + std::to_string(levels));
}

kernels::Region region_of(Plane<float>& plane, std::size_t level) {
  return {plane.values().data(), plane.width(), plane.width() >> level, plane.height() >> level};
}

// Half-sample symmetric reflection of index i into [0, n).
std::size_t reflect(std::size_t i, std::size_t n) {
  const std::size_t period = 2 * n;
  i %= period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

std::span<const double> daubechies8() { return kDaubechies8; }

void decompose(Plane<float>& plane, std::size_t levels, kernels::Backend backend) {
  check_divisible(plane, levels);
  for (std::size_t l = 0; l < levels; ++l) {
    if (backend == kernels::Backend::Serial)
      kernels::serial::dwt2_level(region_of(plane, l), kDaubechies8);
    else
      kernels::omp::dwt2_level(region_of(plane, l), kDaubechies8);
  }
}

void reconstruct(Plane<float>& plane, std::size_t levels, kernels::Backend backend) {
  check_divisible(plane, levels);
  for (std::size_t l = levels; l-- > 0;) {
    if (backend == kernels::Backend::Serial)
      kernels::serial::idwt2_level(region_of(plane, l), kDaubechies8);
    else
      kernels::omp::idwt2_level(region_of(plane, l), kDaubechies8);
  }
}

Plane<float> mirror_pad(const LumaFrame& frame, std::size_t multiple) {
  const std::size_t w = (frame.width() + multiple - 1) / multiple * multiple;
  const std::size_t h = (frame.height() + multiple - 1) / multiple * multiple;
  Plane<float> out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const auto src = frame.row(reflect(y, frame.height()));
    auto dst = out.row(y);
    for (std::size_t x = 0; x < w; ++x) dst[x] = src[reflect(x, frame.width())];
  }
  return out;
}

}  // namespace vidprnu::wavelet
