#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vidprnu {

/// Reads a whole file; throws Error(Io) attributed to `module`.
std::string read_file(const std::filesystem::path& path, const char* module);

/// Writes `<path>.partial` and renames it over `path`, so readers never see a
/// half-written artifact. The partial file is removed on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes, const char* module);

}  // namespace vidprnu
