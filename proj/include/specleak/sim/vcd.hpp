#pragma once

// Value change dump reading and writing. One timestamp per clock cycle,
// two-valued binary values only.

#include <filesystem>
#include <string>
#include <string_view>

#include "specleak/error.hpp"
#include "specleak/sim/waveform.hpp"

namespace specleak::vcd {

class VcdError : public Error {
public:
  enum class Kind { MalformedHeader, UnknownIdentifier, NonMonotonicTime, ChangeBeforeDumpvars, BadValue };

  VcdError(Kind kind, std::size_t line, const std::string& message);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

private:
  Kind kind_;
  std::size_t line_;
};

std::string write_vcd(const sim::Waveform& w);
void save_vcd(const sim::Waveform& w, const std::filesystem::path& path);

sim::Waveform parse_vcd(std::string_view text);
sim::Waveform load_vcd(const std::filesystem::path& path);

} // namespace specleak::vcd
