#pragma once

#include <stdexcept>
#include <string>

namespace motdual {

// Argument outside the mathematical domain of an operation (t outside [0,T],
// K <= 1 for the alpha claim, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration (unknown model or claim names,
// missing files, out-of-range numeric parameters).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Combinatorial blow-up guard tripped while enumerating a path tree.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Requested computation is not available for the given representation.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An embedded path history has no counterpart in a truncated path tree.
class OutOfTreeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Parse or read failures for the CSV/JSON interchange formats.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace motdual
