#pragma once

#include <cstddef>
#include <span>

#include "vidprnu/kernels.hpp"
#include "vidprnu/plane.hpp"

namespace vidprnu::wavelet {

/// Lowpass analysis filter of the 8-tap orthogonal Daubechies wavelet.
std::span<const double> daubechies8();

/// Multi-level 2-D decomposition in place (Mallat layout: the LL band of
/// level l occupies the top-left (w >> l) x (h >> l) corner). Both sides must
/// be divisible by 2^levels.
void decompose(Plane<float>& plane, std::size_t levels, kernels::Backend backend = kernels::Backend::OpenMP);

/// Inverse of decompose.
void reconstruct(Plane<float>& plane, std::size_t levels, kernels::Backend backend = kernels::Backend::OpenMP);

/// Half-sample symmetric extension of the right and bottom edges up to the
/// next multiple of `multiple`.
Plane<float> mirror_pad(const LumaFrame& frame, std::size_t multiple);

}  // namespace vidprnu::wavelet
