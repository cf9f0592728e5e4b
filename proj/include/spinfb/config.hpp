#pragma once

// Flat `section.key = value` configuration text. Lines starting with `#` are
// comments. State specs are written as
//   basis:N | diag:a,b,c | bloch:x,y,z | mixed
// and controllers as controller.kind = off | constant | population | expectation.

#include <string>
#include <string_view>

#include "spinfb/sim_config.hpp"

namespace spinfb {

/// Throws ConfigError listing every problem found (syntax, unknown or
/// duplicate keys, malformed values, and failed SimConfig invariants).
SimConfig parse_config(std::string_view text);

/// Canonical text with every key present; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

/// Reads and parses a file; IoError if it cannot be read.
SimConfig load_config(const std::string& path);

std::string format_state_spec(const StateSpec& spec);
StateSpec parse_state_spec(std::string_view text);  // throws ConfigError

/// Shortest text that reads back to exactly `x` (17 significant digits at most).
std::string format_real(double x);

}  // namespace spinfb
