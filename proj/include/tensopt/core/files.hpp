#pragma once

#include <filesystem>
#include <string>

namespace tensopt {

/// Throws std::runtime_error if the file cannot be read.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

/// Directory holding the shipped kernels, prompts and configs. Overridable
/// with the TENSOPT_ASSETS environment variable.
std::filesystem::path asset_dir();
std::string read_asset(const std::string& relative);

/// 64-bit FNV-1a, used for content hashes.
std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace tensopt
