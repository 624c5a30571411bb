#pragma once

#include <stdexcept>
#include <string>

namespace dirms {

//! Base class for every error thrown by this library.
//!
//! All failure modes that calling code may reasonably want to catch derive
//! from this type; std::invalid_argument is reserved for plain API misuse
//! (wrong flag values, out-of-contract step sizes, and the like).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

}  // namespace dirms
