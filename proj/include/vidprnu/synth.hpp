#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprnu/fingerprint.hpp"
#include "vidprnu/frameio.hpp"
#include "vidprnu/metrics.hpp"

namespace vidprnu {

enum class SceneModel { Flat, Gradient, Textured };

std::string_view to_string(SceneModel model);
/// Accepts "flat", "gradient" or "textured"; throws Error(Config) otherwise.
SceneModel parse_scene_model(std::string_view name);

struct SynthConfig {
  std::size_t devices = 8;
  /// One entry applies to every device; otherwise one entry per device.
  std::vector<std::size_t> videos_per_device{10};
  std::size_t frames = 24;
  std::size_t width = 640;
  std::size_t height = 480;
  double strength = 0.08;
  SceneModel scene = SceneModel::Textured;
  double dead_fraction = 0.3;
  double shot_variance = 4.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t videos_of(std::size_t device) const;
  std::size_t total_videos() const;
};

struct SynthDevice {
  std::string id;
  /// Zero mean, unit variance; frames apply strength * fingerprint.
  Plane<float> fingerprint;
};

struct SynthVideo {
  std::string id;
  std::string device_id;
  VideoFrameSet set;
};

std::string device_id(std::size_t device);
std::string video_id(std::size_t device, std::size_t video);

SynthDevice make_device(const SynthConfig& config, std::size_t device);

/// Frames I = clip(round(scene * (1 + strength * K) + noise), 0, 255) where K
/// is present only in alive macroblocks, plus a coefficient dump marking each
/// block alive (nonzero AC) or dead (DC only). The random stream depends only
/// on (seed, device, video).
SynthVideo make_video(const SynthConfig& config, const SynthDevice& device, std::size_t device_index,
                      std::size_t video_index);

struct ManifestVideo {
  std::string id;
  std::string device;
  std::filesystem::path frames_dir;
  std::string pattern;
  std::filesystem::path coeffs;
  std::size_t frames = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::filesystem::path labels;
  std::map<std::string, std::filesystem::path> devices;  // id -> true fingerprint file
  std::vector<ManifestVideo> videos;
};

/// Writes <out>/<video>/frame_{index}.pgm (from 1), <out>/<video>/coeffs.xml,
/// <out>/devices/<device>.vfp, <out>/labels.csv and <out>/manifest.json.
/// Paths inside the manifest are relative to it.
Manifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out);

/// Loads manifest.json and resolves its paths against the manifest directory.
Manifest read_manifest(const std::filesystem::path& path);

struct PlantVideo {
  std::string id;
  std::string device;
  double own = 0.0;  // corr with the labelled device's true fingerprint
};

struct PlantReport {
  std::vector<PlantVideo> videos;
  double same_mean = 0.0;
  double cross_mean = 0.0;
  double margin = 0.0;      // same_mean - cross_mean
  bool cross_empty = false; // only one device: no cross pairs
};

/// Correlates every estimate with every true fingerprint and compares the
/// labelled device against the others. Throws Error(Id) when an estimate has
/// no label or its device has no true fingerprint.
PlantReport plant_check(const std::map<std::string, Plane<float>>& truth_fingerprints, const GroundTruth& labels,
                        std::span<const Fingerprint> estimates);

}  // namespace vidprnu
