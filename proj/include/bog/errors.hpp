#pragma once

#include <stdexcept>

namespace bog {

/// Malformed or inconsistent input data (files, streams, CLI-provided values).
/// The CLI maps this to exit code 2; programming errors (std::logic_error and
/// friends) map to exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bog
