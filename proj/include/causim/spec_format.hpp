#pragma once

#include <string>

#include "causim/process.hpp"

namespace causim {

// Line-oriented plain-text process description.
//
//   # comment
//   process <name>
//   variable <name> <role> <domain-size> [: <parent> <parent> ...]
//   mechanism <name>
//   row [<parent symbols>] : <prob> ... <prob>
//
// Variables are declared in causal order and parents must be declared
// before their children. Every mechanism block must supply one row per
// parent assignment. Syntax errors raise ParseError with line/column;
// semantic errors raise ValidationError naming the variable.
CausalProcess parse_process_spec(const std::string& text);

// Canonical form: declarations in id order, rows in odometer order,
// probabilities printed with 17 significant digits so that values
// round-trip bit-identically.
std::string serialize_process_spec(const CausalProcess& process);

}  // namespace causim
