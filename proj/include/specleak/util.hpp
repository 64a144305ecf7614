#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace specleak {

inline constexpr int kFormatVersion = 1;

constexpr std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
}

/// 64-bit FNV-1a. Used for stable content ids (corpus entries, PDLC paths).
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Lower-case fixed-width hex rendering of `value` using `digits` nibbles.
std::string to_hex(std::uint64_t value, unsigned digits);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// "cpu.regfile[3]" -> "cpu.regfile"; names without an element suffix are returned unchanged.
std::string_view base_signal_name(std::string_view name);

} // namespace specleak
