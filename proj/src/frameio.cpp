#include "vidprnu/frameio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <regex>

#include "vidprnu/error.hpp"

namespace vidprnu {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "frameio";
constexpr std::string_view kPlaceholder = "{index}";

[[noreturn]] void format_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::Format, kModule, path.string() + ": " + what);
}

LumaFrame load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, kModule, "cannot open " + path.string());

  // Header tokens may be separated by whitespace and '#' comments.
  auto next_token = [&]() {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {}
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok += static_cast<char>(c);
    }
    return tok;
  };

  if (next_token() != "P5") format_error(path, "not a binary PGM (P5)");
  std::size_t width = 0, height = 0;
  int maxval = 0;
  try {
    width = std::stoul(next_token());
    height = std::stoul(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    format_error(path, "malformed PGM header");
  }
  if (width == 0 || height == 0) format_error(path, "zero-sized image");
  if (maxval <= 0 || maxval > 255) format_error(path, "only 8-bit PGM is supported");

  std::vector<std::uint8_t> samples(width * height);
  in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
  if (static_cast<std::size_t>(in.gcount()) != samples.size()) format_error(path, "truncated pixel data");
  return LumaFrame(width, height, std::move(samples));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

struct PngImage {
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  int bit_depth = 0;
};

// libpng reports errors through longjmp, so this function keeps no local
// state of its own; everything lives in `img`.
bool decode_png(png_structp png, png_infop info, std::FILE* file, PngImage& img) {
  if (setjmp(png_jmpbuf(png)) != 0) return false;
  png_init_io(png, file);
  png_read_info(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  if (img.bit_depth > 8) return false;
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && img.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.channels = png_get_channels(png, info);
  img.pixels.resize(img.width * img.height * img.channels);
  img.rows.resize(img.height);
  for (std::size_t y = 0; y < img.height; ++y) img.rows[y] = img.pixels.data() + y * img.width * img.channels;
  png_read_image(png, img.rows.data());
  png_read_end(png, nullptr);
  return true;
}

LumaFrame load_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::Io, kModule, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorKind::Io, kModule, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::Io, kModule, "libpng initialisation failed");
  }
  PngImage img;
  const bool ok = decode_png(png, info, file.get(), img);
  png_destroy_read_struct(&png, &info, nullptr);
  if (img.bit_depth > 8) format_error(path, "only 8-bit PNG is supported");
  if (!ok) format_error(path, "corrupt PNG");
  const std::size_t width = img.width, height = img.height, channels = img.channels;
  const auto& rgb = img.pixels;
  if (width == 0 || height == 0) format_error(path, "zero-sized image");

  LumaFrame frame(width, height);
  auto out = frame.values();
  if (channels == 1) {
    std::copy(rgb.begin(), rgb.end(), out.begin());
  } else if (channels == 3) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = luma_bt601(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  } else {
    format_error(path, "unsupported channel count " + std::to_string(channels));
  }
  return frame;
}

}  // namespace

std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Integer form of round(0.299 R + 0.587 G + 0.114 B); halves round up.
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

LumaFrame load_frame(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error(ErrorKind::Io, kModule, "cannot open " + path.string());
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), 8);
  if (probe.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
  if (probe.gcount() == 8 && png_sig_cmp(magic, 0, 8) == 0) return load_png(path);
  format_error(path, "unsupported image format (expected binary PGM or PNG)");
}

void write_pgm(const fs::path& path, const LumaFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, kModule, "cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.values().data()), static_cast<std::streamsize>(frame.size()));
  if (!out) throw Error(ErrorKind::Io, kModule, "write failed for " + path.string());
}

std::string expand_pattern(const std::string& pattern, std::size_t index) {
  auto pos = pattern.find(kPlaceholder);
  if (pos == std::string::npos)
    throw Error(ErrorKind::Config, kModule, "pattern '" + pattern + "' has no {index} placeholder");
  std::string out = pattern;
  out.replace(pos, kPlaceholder.size(), std::to_string(index));
  return out;
}

std::vector<LumaFrame> load_frame_sequence(const fs::path& directory, const std::string& pattern) {
  auto pos = pattern.find(kPlaceholder);
  if (pos == std::string::npos)
    throw Error(ErrorKind::Config, kModule, "pattern '" + pattern + "' has no {index} placeholder");
  if (!fs::is_directory(directory))
    throw Error(ErrorKind::Io, kModule, directory.string() + " is not a directory");

  auto quote = [](std::string_view s) {
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    return std::regex_replace(std::string(s), special, R"(\$&)");
  };
  const std::regex re(quote(std::string_view(pattern).substr(0, pos)) + "([0-9]+)" +
                      quote(std::string_view(pattern).substr(pos + kPlaceholder.size())));

  std::map<std::size_t, fs::path> indexed;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, re)) continue;
    std::size_t index = std::stoul(m[1].str());
    auto [it, inserted] = indexed.emplace(index, entry.path());
    if (!inserted)
      throw Error(ErrorKind::Format, kModule,
                  "index " + std::to_string(index) + " matched twice: " + it->second.filename().string() +
                      " and " + name);
  }
  if (indexed.empty())
    throw Error(ErrorKind::Io, kModule, "no files matching '" + pattern + "' in " + directory.string());

  std::size_t first = indexed.begin()->first;
  if (first > 1) throw Error(ErrorKind::Gap, kModule, "missing frame index 1 (sequence must start at 0 or 1)");
  std::vector<fs::path> paths;
  std::size_t expect = first;
  for (const auto& [index, path] : indexed) {
    if (index != expect) throw Error(ErrorKind::Gap, kModule, "missing frame index " + std::to_string(expect));
    paths.push_back(path);
    ++expect;
  }

  std::vector<LumaFrame> frames(paths.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(paths.size()); ++i) {
    try {
      frames[i] = load_frame(paths[i]);
    } catch (...) {
#pragma omp critical(vidprnu_frameio_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_shape(frames[0]))
      throw Error(ErrorKind::Resolution, kModule,
                  paths[i].filename().string() + " is " + std::to_string(frames[i].width()) + "x" +
                      std::to_string(frames[i].height()) + ", expected " + std::to_string(frames[0].width()) +
                      "x" + std::to_string(frames[0].height()));
  }
  return frames;
}

VideoFrameSet align(std::vector<LumaFrame> frames, std::vector<FrameCoeffs> coeffs, bool strict) {
  if (frames.size() != coeffs.size())
    throw Error(ErrorKind::Alignment, kModule,
                "frame count and coefficient dump count differ: " + std::to_string(frames.size()) + " vs " +
                    std::to_string(coeffs.size()));
  if (frames.empty()) throw Error(ErrorKind::Alignment, kModule, "empty video: 0 frames");

  VideoFrameSet set;
  set.width = frames.front().width();
  set.height = frames.front().height();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!frames[k].same_shape(set.width, set.height))
      throw Error(ErrorKind::Resolution, kModule, "frame " + std::to_string(k) + " has a different resolution");
    for (const auto& mb : coeffs[k].macroblocks) {
      if (mb.x >= set.width || mb.y >= set.height)
        throw Error(ErrorKind::Bounds, kModule,
                    "frame " + std::to_string(k) + ": macroblock at (" + std::to_string(mb.x) + "," +
                        std::to_string(mb.y) + ") lies outside " + std::to_string(set.width) + "x" +
                        std::to_string(set.height));
    }
    if (strict && coeffs[k].macroblocks.size() != macroblock_grid_size(set.width, set.height))
      throw Error(ErrorKind::Bounds, kModule,
                  "frame " + std::to_string(k) + ": " + std::to_string(coeffs[k].macroblocks.size()) +
                      " macroblocks do not match the " + std::to_string(set.width) + "x" +
                      std::to_string(set.height) + " grid");
  }
  set.frames = std::move(frames);
  set.coeffs = std::move(coeffs);
  return set;
}

}  // namespace vidprnu
