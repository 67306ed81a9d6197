#pragma once

#include <stdexcept>

namespace approxmax {

// Invalid user-supplied configuration: malformed formats, bad LUT geometry,
// unparsable config files. Maps to CLI exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem or stream failure. Maps to CLI exit code 3.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerically degenerate pipeline state, e.g. a softmax denominator that
// quantized to zero. Maps to CLI exit code 4.
struct degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace approxmax
