#pragma once

#include <stdexcept>
#include <string>

namespace mpp {

// Bad user input: malformed spec, parameter out of domain. CLI exit code 2.
struct invalid_parameter : std::runtime_error {
  explicit invalid_parameter(const std::string& msg) : std::runtime_error(msg) {}
};

// A model failed on input that passed validation (degenerate constraint system,
// enumeration budget exceeded, ...). CLI exit code 3.
struct model_error : std::runtime_error {
  explicit model_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem or serialization failure. CLI exit code 4.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mpp
