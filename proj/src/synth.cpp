#include "vidprnu/synth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "json.hpp"
#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"
#include "vidprnu/similarity.hpp"

namespace vidprnu {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "synth";
constexpr std::string_view kFramePattern = "frame_{index}.pgm";

// Independent random streams per purpose.
enum StreamTag : std::uint32_t { kFingerprintStream = 1, kSceneStream = 2, kBlockStream = 3, kNoiseStream = 4 };

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t device, std::size_t video, StreamTag tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(device), static_cast<std::uint32_t>(video),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t key, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h =
      splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x632BE59BD9B4E019ull + static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise in [0, 1) on the unit lattice.
double value_noise(std::uint64_t key, double fx, double fy) {
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  const auto ix = static_cast<std::int64_t>(x0), iy = static_cast<std::int64_t>(y0);
  const double tx = smoothstep(fx - x0), ty = smoothstep(fy - y0);
  const double a = lattice(key, ix, iy), b = lattice(key, ix + 1, iy);
  const double c = lattice(key, ix, iy + 1), d = lattice(key, ix + 1, iy + 1);
  const double top = a + (b - a) * tx, bottom = c + (d - c) * tx;
  return top + (bottom - top) * ty;
}

struct Scene {
  SceneModel model;
  std::size_t width;
  std::size_t height;
  std::uint64_t coarse_key = 0;
  std::uint64_t fine_key = 0;
  double x0 = 0.0, y0 = 0.0;  // pan origin
  double vx = 0.0, vy = 0.0;  // pan velocity, pixels per frame

  void fill(std::size_t t, std::vector<double>& out) const {
    out.resize(width * height);
    switch (model) {
      case SceneModel::Flat:
        std::fill(out.begin(), out.end(), 128.0);
        break;
      case SceneModel::Gradient: {
        const double span = static_cast<double>(width + height > 2 ? width + height - 2 : 1);
        for (std::size_t y = 0; y < height; ++y)
          for (std::size_t x = 0; x < width; ++x)
            out[y * width + x] = 32.0 + 192.0 * static_cast<double>(x + y) / span;
        break;
      }
      case SceneModel::Textured: {
        const double ox = x0 + vx * static_cast<double>(t);
        const double oy = y0 + vy * static_cast<double>(t);
        for (std::size_t y = 0; y < height; ++y) {
          for (std::size_t x = 0; x < width; ++x) {
            const double px = static_cast<double>(x) + ox, py = static_cast<double>(y) + oy;
            const double v = 0.65 * value_noise(coarse_key, px / 24.0, py / 24.0) +
                             0.35 * value_noise(fine_key, px / 8.0, py / 8.0);
            out[y * width + x] = 40.0 + 175.0 * v;
          }
        }
        break;
      }
    }
  }
};

SliceType slice_for(std::size_t t) {
  if (t % 12 == 0) return SliceType::I;
  return t % 3 == 0 ? SliceType::P : SliceType::B;
}

std::string pred_mode_for(SliceType type) {
  switch (type) {
    case SliceType::I: return "BLOCK_TYPE_I";
    case SliceType::P: return "BLOCK_TYPE_P";
    case SliceType::B: return "BLOCK_TYPE_B";
  }
  return {};
}

std::string padded(std::size_t value, std::size_t count) {
  const std::size_t digits = std::max<std::size_t>(2, std::to_string(count).size());
  std::string s = std::to_string(value);
  return std::string(digits > s.size() ? digits - s.size() : 0, '0') + s;
}

// Runs body(i) for i in [0, n) in parallel; rethrows the failure with the
// smallest index so the reported error does not depend on scheduling.
template <typename F>
void parallel_for_each(std::size_t n, F&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string_view to_string(SceneModel model) {
  switch (model) {
    case SceneModel::Flat: return "flat";
    case SceneModel::Gradient: return "gradient";
    case SceneModel::Textured: return "textured";
  }
  return "unknown";
}

SceneModel parse_scene_model(std::string_view name) {
  if (name == "flat") return SceneModel::Flat;
  if (name == "gradient") return SceneModel::Gradient;
  if (name == "textured") return SceneModel::Textured;
  throw Error(ErrorKind::Config, kModule, "unknown scene model '" + std::string(name) + "'");
}

void SynthConfig::validate() const {
  if (devices < 1) throw Error(ErrorKind::Config, kModule, "need at least one device");
  if (videos_per_device.empty() || (videos_per_device.size() != 1 && videos_per_device.size() != devices))
    throw Error(ErrorKind::Config, kModule,
                "videos per device must have 1 or " + std::to_string(devices) + " entries");
  for (auto v : videos_per_device)
    if (v < 1) throw Error(ErrorKind::Config, kModule, "every device needs at least one video");
  if (frames < 1) throw Error(ErrorKind::Config, kModule, "need at least one frame");
  if (width < 1 || height < 1) throw Error(ErrorKind::Config, kModule, "empty resolution");
  if (!(dead_fraction >= 0.0 && dead_fraction <= 1.0))
    throw Error(ErrorKind::Config, kModule, "dead-block fraction must lie in [0, 1]");
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw Error(ErrorKind::Config, kModule, "strength must be >= 0");
  if (!(shot_variance >= 0.0) || !std::isfinite(shot_variance))
    throw Error(ErrorKind::Config, kModule, "shot-noise variance must be >= 0");
}

std::size_t SynthConfig::videos_of(std::size_t device) const {
  return videos_per_device.size() == 1 ? videos_per_device[0] : videos_per_device.at(device);
}

std::size_t SynthConfig::total_videos() const {
  std::size_t total = 0;
  for (std::size_t d = 0; d < devices; ++d) total += videos_of(d);
  return total;
}

std::string device_id(std::size_t device) { return "D" + padded(device + 1, 0); }

std::string video_id(std::size_t device, std::size_t video) {
  return device_id(device) + "_V" + padded(video + 1, 0);
}

SynthDevice make_device(const SynthConfig& config, std::size_t device) {
  auto rng = make_stream(config.seed, device, 0, kFingerprintStream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> raw(config.width * config.height);
  double sum = 0.0;
  for (auto& v : raw) {
    v = gauss(rng);
    sum += v;
  }
  const double mean = sum / static_cast<double>(raw.size());
  double ss = 0.0;
  for (auto& v : raw) {
    v -= mean;
    ss += v * v;
  }
  const double scale = ss > 0.0 ? 1.0 / std::sqrt(ss / static_cast<double>(raw.size())) : 1.0;

  SynthDevice d;
  d.id = device_id(device);
  d.fingerprint = Plane<float>(config.width, config.height);
  auto out = d.fingerprint.values();
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(raw[i] * scale);
  return d;
}

SynthVideo make_video(const SynthConfig& config, const SynthDevice& device, std::size_t device_index,
                      std::size_t video_index) {
  config.validate();
  if (!device.fingerprint.same_shape(config.width, config.height))
    throw Error(ErrorKind::Shape, kModule, "device fingerprint does not match the configured resolution");
  const std::size_t w = config.width, h = config.height;
  const std::size_t cols = (w + kMacroblockSize - 1) / kMacroblockSize;
  const std::size_t rows = (h + kMacroblockSize - 1) / kMacroblockSize;

  auto scene_rng = make_stream(config.seed, device_index, video_index, kSceneStream);
  auto block_rng = make_stream(config.seed, device_index, video_index, kBlockStream);
  auto noise_rng = make_stream(config.seed, device_index, video_index, kNoiseStream);

  Scene scene{config.scene, w, h};
  scene.coarse_key = scene_rng();
  scene.fine_key = scene_rng();
  std::uniform_real_distribution<double> origin(0.0, 4096.0), velocity(-3.0, 3.0);
  scene.x0 = origin(scene_rng);
  scene.y0 = origin(scene_rng);
  scene.vx = velocity(scene_rng);
  scene.vy = velocity(scene_rng);

  std::bernoulli_distribution dead(config.dead_fraction);
  std::bernoulli_distribution zero_ac(0.5);
  std::uniform_int_distribution<int> dc(-64, 64), magnitude(1, 7), sign(0, 1);
  std::uniform_int_distribution<std::size_t> ac_slot(1, 15);
  std::normal_distribution<double> noise(0.0, std::sqrt(config.shot_variance));

  SynthVideo video;
  video.id = video_id(device_index, video_index);
  video.device_id = device.id;
  video.set.width = w;
  video.set.height = h;
  video.set.frames.reserve(config.frames);
  video.set.coeffs.reserve(config.frames);

  const auto k = device.fingerprint.values();
  std::vector<double> pixels;
  std::vector<std::uint8_t> alive(cols * rows);
  for (std::size_t t = 0; t < config.frames; ++t) {
    FrameCoeffs fc;
    fc.picture_id = static_cast<std::int64_t>(t);
    fc.poc = static_cast<std::int64_t>(2 * t);
    fc.slice_type = slice_for(t);
    fc.macroblocks.reserve(cols * rows);
    for (std::size_t by = 0; by < rows; ++by) {
      for (std::size_t bx = 0; bx < cols; ++bx) {
        MacroblockRecord mb;
        mb.index = static_cast<std::int64_t>(by * cols + bx);
        mb.x = bx * kMacroblockSize;
        mb.y = by * kMacroblockSize;
        mb.pred_mode = pred_mode_for(fc.slice_type);
        CoeffMatrix m{4, 4, std::vector<std::int32_t>(16, 0)};
        m.values[0] = dc(block_rng);
        const bool is_dead = dead(block_rng);
        if (!is_dead) {
          bool any = false;
          for (std::size_t i = 1; i < 16; ++i) {
            if (zero_ac(block_rng)) continue;
            m.values[i] = magnitude(block_rng) * (sign(block_rng) ? 1 : -1);
            any = true;
          }
          if (!any) m.values[ac_slot(block_rng)] = magnitude(block_rng) * (sign(block_rng) ? 1 : -1);
        }
        alive[by * cols + bx] = is_dead ? 0 : 1;
        mb.coeffs.push_back(std::move(m));
        fc.macroblocks.push_back(std::move(mb));
      }
    }

    scene.fill(t, pixels);
    LumaFrame frame(w, h);
    for (std::size_t y = 0; y < h; ++y) {
      const std::uint8_t* block_row = alive.data() + (y / kMacroblockSize) * cols;
      auto out = frame.row(y);
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        const double gain = block_row[x / kMacroblockSize] ? 1.0 + config.strength * k[i] : 1.0;
        const double v = std::round(pixels[i] * gain + noise(noise_rng));
        out[x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
    video.set.frames.push_back(std::move(frame));
    video.set.coeffs.push_back(std::move(fc));
  }
  return video;
}

Manifest generate_dataset(const SynthConfig& config, const fs::path& out) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out / "devices", ec);
  if (ec) throw Error(ErrorKind::Io, kModule, "cannot create " + out.string() + ": " + ec.message());

  std::vector<SynthDevice> devices(config.devices);
  parallel_for_each(config.devices, [&](std::size_t d) { devices[d] = make_device(config, d); });

  struct Job {
    std::size_t device;
    std::size_t video;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < config.devices; ++d)
    for (std::size_t v = 0; v < config.videos_of(d); ++v) jobs.push_back({d, v});

  Manifest manifest;
  manifest.seed = config.seed;
  manifest.width = config.width;
  manifest.height = config.height;
  manifest.labels = "labels.csv";
  GroundTruth truth;
  for (const auto& j : jobs) {
    ManifestVideo mv;
    mv.id = video_id(j.device, j.video);
    mv.device = device_id(j.device);
    mv.frames_dir = mv.id;
    mv.pattern = std::string(kFramePattern);
    mv.coeffs = fs::path(mv.id) / "coeffs.xml";
    mv.frames = config.frames;
    truth[mv.id] = mv.device;
    manifest.videos.push_back(std::move(mv));
  }

  for (const auto& d : devices) {
    Fingerprint fp;
    fp.values = d.fingerprint;
    fp.meta.video_id = d.id;
    const fs::path rel = fs::path("devices") / (d.id + ".vfp");
    write_fingerprint(out / rel, fp);
    manifest.devices[d.id] = rel;
  }

  parallel_for_each(jobs.size(), [&](std::size_t i) {
    const auto& j = jobs[i];
    const auto& mv = manifest.videos[i];
    SynthVideo video = make_video(config, devices[j.device], j.device, j.video);
    const fs::path dir = out / mv.frames_dir;
    std::error_code dir_ec;
    fs::create_directories(dir, dir_ec);
    if (dir_ec) throw Error(ErrorKind::Io, kModule, "cannot create " + dir.string() + ": " + dir_ec.message());
    for (std::size_t t = 0; t < video.set.frames.size(); ++t)
      write_pgm(dir / expand_pattern(mv.pattern, t + 1), video.set.frames[t]);
    write_file_atomic(out / mv.coeffs, serialize_coeff_dump(video.set.coeffs), kModule);
  });

  write_labels(out / manifest.labels, truth);

  nlohmann::ordered_json j;
  j["format"] = "vidprnu-synth-1";
  j["seed"] = config.seed;
  j["width"] = config.width;
  j["height"] = config.height;
  j["frames_per_video"] = config.frames;
  j["config"] = {{"devices", config.devices},
                 {"videos_per_device", config.videos_per_device},
                 {"frames", config.frames},
                 {"width", config.width},
                 {"height", config.height},
                 {"strength", config.strength},
                 {"scene", std::string(to_string(config.scene))},
                 {"dead_fraction", config.dead_fraction},
                 {"shot_variance", config.shot_variance},
                 {"seed", config.seed}};
  j["labels"] = manifest.labels.generic_string();
  auto devs = nlohmann::ordered_json::array();
  for (const auto& [id, path] : manifest.devices) devs.push_back({{"id", id}, {"fingerprint", path.generic_string()}});
  j["devices"] = std::move(devs);
  auto vids = nlohmann::ordered_json::array();
  for (const auto& mv : manifest.videos)
    vids.push_back({{"id", mv.id},
                    {"device", mv.device},
                    {"frames_dir", mv.frames_dir.generic_string()},
                    {"pattern", mv.pattern},
                    {"coeffs", mv.coeffs.generic_string()},
                    {"frames", mv.frames}});
  j["videos"] = std::move(vids);
  write_file_atomic(out / "manifest.json", j.dump(2) + "\n", kModule);

  // Return absolute-resolved paths, as read_manifest would.
  manifest.labels = out / manifest.labels;
  for (auto& [id, path] : manifest.devices) path = out / path;
  for (auto& mv : manifest.videos) {
    mv.frames_dir = out / mv.frames_dir;
    mv.coeffs = out / mv.coeffs;
  }
  return manifest;
}

Manifest read_manifest(const fs::path& path) {
  const fs::path base = path.parent_path();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path, kModule));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, kModule, "manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.width = j.at("width").get<std::size_t>();
    m.height = j.at("height").get<std::size_t>();
    m.labels = base / j.at("labels").get<std::string>();
    for (const auto& d : j.at("devices"))
      m.devices[d.at("id").get<std::string>()] = base / d.at("fingerprint").get<std::string>();
    for (const auto& v : j.at("videos")) {
      ManifestVideo mv;
      mv.id = v.at("id").get<std::string>();
      mv.device = v.at("device").get<std::string>();
      mv.frames_dir = base / v.at("frames_dir").get<std::string>();
      mv.pattern = v.at("pattern").get<std::string>();
      mv.coeffs = base / v.at("coeffs").get<std::string>();
      mv.frames = v.at("frames").get<std::size_t>();
      m.videos.push_back(std::move(mv));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, kModule, "manifest " + path.string() + ": " + e.what());
  }
  return m;
}

PlantReport plant_check(const std::map<std::string, Plane<float>>& truth_fingerprints, const GroundTruth& labels,
                        std::span<const Fingerprint> estimates) {
  PlantReport report;
  double same_sum = 0.0, cross_sum = 0.0;
  std::size_t cross_count = 0;
  for (const auto& est : estimates) {
    auto label = labels.find(est.meta.video_id);
    if (label == labels.end())
      throw Error(ErrorKind::Id, kModule, "estimate '" + est.meta.video_id + "' is not in the manifest");
    if (!truth_fingerprints.contains(label->second))
      throw Error(ErrorKind::Id, kModule,
                  "device '" + label->second + "' of '" + est.meta.video_id + "' has no true fingerprint");
    PlantVideo pv{est.meta.video_id, label->second, 0.0};
    for (const auto& [device, truth] : truth_fingerprints) {
      if (!truth.same_shape(est.values))
        throw Error(ErrorKind::Shape, kModule, "estimate '" + est.meta.video_id + "' does not match device size");
      const double r = correlation(est.values.values(), truth.values());
      if (device == label->second) {
        pv.own = r;
      } else {
        cross_sum += r;
        ++cross_count;
      }
    }
    same_sum += pv.own;
    report.videos.push_back(std::move(pv));
  }
  if (!report.videos.empty()) report.same_mean = same_sum / static_cast<double>(report.videos.size());
  report.cross_empty = cross_count == 0;
  report.cross_mean = cross_count ? cross_sum / static_cast<double>(cross_count) : 0.0;
  report.margin = report.same_mean - report.cross_mean;
  return report;
}

}  // namespace vidprnu
