#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "reference.hpp"
#include "support.hpp"
#include "vidprnu/denoise.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/synth.hpp"
#include "vidprnu/wavelet.hpp"

using namespace vidprnu;
using testing::error_kind;

namespace {

double corr(std::span<const float> a, std::span<const float> b) {
  return static_cast<double>(reference::pearson(a, b));
}

}  // namespace

TEST_SUITE("denoise") {
  TEST_CASE("daubechies filter is orthonormal") {
    auto h = wavelet::daubechies8();
    REQUIRE(h.size() == 8);
    double sum = 0, energy = 0;
    for (double v : h) {
      sum += v;
      energy += v * v;
    }
    CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t shift = 2; shift < 8; shift += 2) {
      double dot = 0;
      for (std::size_t k = 0; k + shift < 8; ++k) dot += h[k] * h[k + shift];
      CHECK(std::abs(dot) < 1e-12);
    }
  }

  TEST_CASE("decomposition matches direct periodic convolution") {
    const std::size_t w = 64, h = 48, levels = 3;
    Plane<float> p = testing::random_plane(w, h, 21, 20.0f);
    std::vector<double> expect(p.values().begin(), p.values().end());
    const std::vector<double> filter(wavelet::daubechies8().begin(), wavelet::daubechies8().end());
    for (std::size_t l = 0; l < levels; ++l) reference::analyze2(expect, w, w >> l, h >> l, filter);
    wavelet::decompose(p, levels, kernels::Backend::Serial);
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(p.values()[i] == doctest::Approx(expect[i]).epsilon(1e-4));
  }

  TEST_CASE("reconstruction inverts decomposition and preserves energy") {
    Plane<float> p = testing::random_plane(128, 80, 22, 50.0f);
    const Plane<float> original = p;
    double e0 = 0;
    for (float v : original.values()) e0 += double(v) * v;
    wavelet::decompose(p, 4);
    double e1 = 0;
    for (float v : p.values()) e1 += double(v) * v;
    CHECK(e1 == doctest::Approx(e0).epsilon(1e-5));
    wavelet::reconstruct(p, 4);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.values()[i] == doctest::Approx(original.values()[i]).epsilon(1e-4));
    Plane<float> odd(30, 16);
    CHECK(error_kind([&] { wavelet::decompose(odd, 2); }) == ErrorKind::Size);
  }

  TEST_CASE("mirror padding reflects the right and bottom edges") {
    LumaFrame f(5, 3);
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t x = 0; x < 5; ++x) f(x, y) = static_cast<std::uint8_t>(10 * y + x);
    Plane<float> p = wavelet::mirror_pad(f, 4);
    CHECK(p.width() == 8);
    CHECK(p.height() == 4);
    CHECK(p(4, 0) == 4.0f);
    CHECK(p(5, 0) == 4.0f);
    CHECK(p(6, 0) == 3.0f);
    CHECK(p(7, 0) == 2.0f);
    CHECK(p(0, 3) == 20.0f);
    CHECK(p(5, 3) == 24.0f);
  }

  TEST_CASE("constant frame is a fixed point") {
    LumaFrame f(100, 70, 128);
    Plane<float> d = denoise_frame(f, {});
    CHECK(d.width() == 100);
    CHECK(d.height() == 70);
    for (float v : d.values()) CHECK(v == doctest::Approx(128.0).epsilon(1e-5));
    NoiseResidual r = residual(f, DenoiserParams{});
    for (float v : r.values()) CHECK(std::abs(v) < 1e-3f);
  }

  TEST_CASE("an impulse on a flat frame is attenuated") {
    LumaFrame f(64, 64, 128);
    f(30, 33) = 228;
    Plane<float> d = denoise_frame(f, {});
    NoiseResidual r = residual(f, DenoiserParams{});
    double peak = 0, res_peak = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      peak = std::max(peak, std::abs(double(d.values()[i]) - 128.0));
      res_peak = std::max(res_peak, std::abs(double(r.values()[i])));
    }
    CHECK(peak < 100.0);
    CHECK(res_peak < 100.0);
    CHECK(r(30, 33) > 0.0f);
  }

  TEST_CASE("huge noise floor leaves only the approximation band") {
    LumaFrame f = testing::random_frame(64, 48, 23);
    DenoiserParams params;
    params.noise_floor_variance = 1e12;
    Plane<float> d = denoise_frame(f, params);

    Plane<float> approx = wavelet::mirror_pad(f, 16);
    wavelet::decompose(approx, 4);
    const std::size_t aw = approx.width() >> 4, ah = approx.height() >> 4;
    for (std::size_t y = 0; y < approx.height(); ++y)
      for (std::size_t x = 0; x < approx.width(); ++x)
        if (x >= aw || y >= ah) approx(x, y) = 0.0f;
    wavelet::reconstruct(approx, 4);
    for (std::size_t y = 0; y < 48; ++y)
      for (std::size_t x = 0; x < 64; ++x) CHECK(d(x, y) == doctest::Approx(approx(x, y)).epsilon(1e-3));
  }

  TEST_CASE("residual captures planted white noise") {
    const std::size_t w = 256, h = 192;
    std::mt19937 rng(24);
    std::normal_distribution<float> noise(0.0f, 2.0f);
    LumaFrame f(w, h);
    Plane<float> planted(w, h);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double clean = 60.0 + 120.0 * (0.5 + 0.5 * std::sin(x / 23.0) * std::cos(y / 31.0));
        const double v = std::round(clean + noise(rng));
        f(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        planted(x, y) = static_cast<float>(v - clean);
      }
    }
    NoiseResidual r = residual(f, DenoiserParams{});
    CHECK(corr(r.values(), planted.values()) > 0.5);
  }

  TEST_CASE("residuals of one sensor correlate more than across sensors") {
    SynthConfig cfg;
    cfg.width = 128;
    cfg.height = 96;
    cfg.frames = 2;
    cfg.scene = SceneModel::Flat;
    cfg.dead_fraction = 0.0;
    const SynthDevice d0 = make_device(cfg, 0), d1 = make_device(cfg, 1);
    const auto v0 = make_video(cfg, d0, 0, 0);
    const auto v1 = make_video(cfg, d1, 1, 0);
    const NoiseResidual a = residual(v0.set.frames[0], DenoiserParams{});
    const NoiseResidual b = residual(v0.set.frames[1], DenoiserParams{});
    const NoiseResidual c = residual(v1.set.frames[0], DenoiserParams{});
    CHECK(corr(a.values(), b.values()) > corr(a.values(), c.values()));
  }

  TEST_CASE("residual plus denoised reproduces the frame") {
    LumaFrame f = testing::random_frame(50, 40, 25);
    WaveletWienerDenoiser den({});
    Plane<float> d = den.denoise(f);
    NoiseResidual r = residual(f, den);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(r.values()[i] + d.values()[i] == doctest::Approx(double(f.values()[i])).epsilon(1e-5));
    CHECK(den.denoise(f) == d);
  }

  TEST_CASE("serial and omp denoisers agree bit for bit") {
    LumaFrame f = testing::random_frame(120, 90, 26);
    CHECK(WaveletWienerDenoiser({}, kernels::Backend::Serial).denoise(f) ==
          WaveletWienerDenoiser({}, kernels::Backend::OpenMP).denoise(f));
  }

  TEST_CASE("size and parameter validation") {
    CHECK(error_kind([] { denoise_frame(LumaFrame(8, 8), {}); }) == ErrorKind::Size);
    CHECK(denoise_frame(LumaFrame(9, 9, 3), {}).width() == 9);
    DenoiserParams p;
    p.noise_floor_variance = 0;
    CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
    p = {};
    p.window_sizes = {3, 4};
    CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
    p = {};
    p.window_sizes = {};
    CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
    p = {};
    p.levels = 0;
    CHECK(error_kind([&] { p.validate(); }) == ErrorKind::Config);
    CHECK(error_kind([] { make_denoiser("median", {}); }) == ErrorKind::Config);
    CHECK(make_denoiser("wavelet-wiener", {})->name() == "wavelet-wiener");
  }
}
