#pragma once

#include <stdexcept>
#include <string>

namespace ck {

/// Error raised on contract violations (bad input, dimension mismatch, ...).
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Error raised when a mathematical identity that the library guarantees
/// internally fails to hold; always indicates a bug or corrupted input.
struct internal_check_failure : std::logic_error {
  explicit internal_check_failure(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw error(msg);
}

}  // namespace ck
