#ifndef CNMIXT_ERRORS_HPP
#define CNMIXT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cnmixt {

// Cholesky factorization failed, i.e. the matrix is not positive definite.
class NonSpdError : public std::runtime_error {
 public:
  explicit NonSpdError(const std::string& what) : std::runtime_error(what) {}
};

// A mixture component collapsed (empty group or rank-deficient scatter).
class DegenerateFitError : public std::runtime_error {
 public:
  explicit DegenerateFitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Non-finite quantity encountered during fitting.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input (CLI arguments, malformed files, shape mismatches).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cnmixt

#endif
