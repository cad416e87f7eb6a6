#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace longmat::cli {

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool allow_experimental = false;
  unsigned workers = 0;  // 0: all hardware threads
  std::optional<std::string> error_constant_path;
};

/// Process exit code for an exception escaping a command:
/// 2 configuration/consistency, 3 eligibility, 4 numeric/budget/validation.
int exit_code(const std::exception& e);

/// Loads the configuration, applies command-line overrides and runs one
/// command. Returns the exit code; diagnostics go to `err`.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Parses argv and calls run().
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace longmat::cli
