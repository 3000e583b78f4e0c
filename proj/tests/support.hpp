#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "vidprnu/error.hpp"
#include "vidprnu/plane.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("vidprnu_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline fs::path fixture(const std::string& name) { return fs::path(VIDPRNU_FIXTURE_DIR) / name; }

/// Kind of the vidprnu::Error thrown by f, or nullopt if none was thrown.
template <typename F>
std::optional<vidprnu::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const vidprnu::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

template <typename F>
std::string error_message(F&& f) {
  try {
    f();
  } catch (const vidprnu::Error& e) {
    return e.what();
  }
  return {};
}

inline vidprnu::Plane<float> random_plane(std::size_t w, std::size_t h, unsigned seed, float scale = 1.0f) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> gauss(0.0f, scale);
  vidprnu::Plane<float> p(w, h);
  for (auto& v : p.values()) v = gauss(rng);
  return p;
}

inline vidprnu::LumaFrame random_frame(std::size_t w, std::size_t h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pixel(0, 255);
  vidprnu::LumaFrame f(w, h);
  for (auto& v : f.values()) v = static_cast<std::uint8_t>(pixel(rng));
  return f;
}

}  // namespace testing
