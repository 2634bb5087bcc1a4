#pragma once

#include <stdexcept>
#include <string>

namespace woundambit {

/// Malformed arguments, mismatched dimensions, unknown marker IDs and the like.
class invalid_input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No usable reference marker was found, so pixel lengths cannot be converted.
class no_reference_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system or codec failure.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process exit codes used by the command line tool.
enum class exit_code : int {
  ok = 0,
  invalid_input = 2,
  no_reference = 3,
  io = 4,
};

}  // namespace woundambit
