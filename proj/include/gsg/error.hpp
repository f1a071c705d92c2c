#pragma once

#include <stdexcept>
#include <string>

namespace gsg {

// Invalid user input: bad array/region/scene parameters, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside the admissible range of an operation (e.g. a TDOA beyond
// the pair's maximum).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or mismatching serialized tables / audio files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gsg
