#include <bit>
#include <cstring>

#include "vidprnu/error.hpp"
#include "vidprnu/fingerprint.hpp"
#include "vidprnu/io.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "fingerprint";
constexpr std::string_view kMagic = "VFP1";
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 1 + 4 + 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_fingerprint(const Fingerprint& fp) {
  std::string out;
  out.reserve(kHeaderSize + 4 * fp.values.size());
  out += kMagic;
  put_u32(out, static_cast<std::uint32_t>(fp.width()));
  put_u32(out, static_cast<std::uint32_t>(fp.height()));
  out += static_cast<char>(fp.enhanced ? 1 : 0);
  const float alpha = fp.enhanced && fp.meta.alpha ? static_cast<float>(*fp.meta.alpha) : 0.0f;
  put_u32(out, std::bit_cast<std::uint32_t>(alpha));
  put_u32(out, fp.meta.frame_count);
  for (float v : fp.values.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Fingerprint decode_fingerprint(std::string_view bytes, std::string video_id) {
  if (bytes.size() < kHeaderSize || bytes.substr(0, 4) != kMagic)
    throw Error(ErrorKind::Format, kModule, "not a VFP1 fingerprint file");
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  const auto flag = static_cast<unsigned char>(bytes[12]);
  const float alpha = std::bit_cast<float>(get_u32(bytes, 13));
  const std::uint32_t frames = get_u32(bytes, 17);
  if (flag > 1) throw Error(ErrorKind::Format, kModule, "invalid enhanced flag");
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (width == 0 || height == 0 || bytes.size() != kHeaderSize + 4 * count)
    throw Error(ErrorKind::Format, kModule,
                "payload size " + std::to_string(bytes.size() - kHeaderSize) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));

  Fingerprint fp;
  fp.values = Plane<float>(width, height);
  auto values = fp.values.values();
  for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(get_u32(bytes, kHeaderSize + 4 * i));
  fp.enhanced = flag == 1;
  fp.meta.video_id = std::move(video_id);
  fp.meta.frame_count = frames;
  if (fp.enhanced) {
    fp.meta.enhancer = "gamma3";
    fp.meta.alpha = alpha;
  }
  return fp;
}

void write_fingerprint(const std::filesystem::path& path, const Fingerprint& fp) {
  write_file_atomic(path, encode_fingerprint(fp), kModule);
}

Fingerprint read_fingerprint(const std::filesystem::path& path) {
  return decode_fingerprint(read_file(path, kModule), path.stem().string());
}

}  // namespace vidprnu
