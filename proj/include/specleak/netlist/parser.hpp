#pragma once

#include <string>
#include <string_view>

#include "specleak/netlist/ast.hpp"

namespace specleak::netlist {

/// Parses and validates netlist source text.
///
/// Validation covers the SourceDesign invariants: unique declarations, every
/// referenced signal declared, every instantiated module defined, port
/// binding widths, and a single top module. Violations raise NetlistError
/// with the offending location.
SourceDesign parse_design(std::string_view source);

/// Canonical source rendering; parse_design(print_design(d)) is structurally equal to d.
std::string print_design(const SourceDesign& design);
std::string print_expr(const Expr& expr);

} // namespace specleak::netlist
