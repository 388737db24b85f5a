#pragma once

#include <stdexcept>
#include <string>

namespace heatnmf {

enum class ErrorKind {
  Validation,  // bad input: shapes, ranks, negative data, parse errors
  Io,
  Numerical,   // internal invariant broken or non-finite result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::Validation, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::Io, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::Numerical, what);
}

// Process exit code for a failure of the given kind.
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Numerical: return 4;
  }
  return 1;
}

}  // namespace heatnmf
