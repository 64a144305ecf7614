#pragma once

#include <filesystem>
#include <string>

namespace testsupport {

inline std::filesystem::path source_dir() {
#ifdef SPECLEAK_SOURCE_DIR
  return SPECLEAK_SOURCE_DIR;
#else
  return std::filesystem::current_path();
#endif
}

inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }

} // namespace testsupport
