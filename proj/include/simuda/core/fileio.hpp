#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace simuda {

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_text(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace simuda
