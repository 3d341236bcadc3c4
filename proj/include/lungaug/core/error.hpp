#pragma once

#include <stdexcept>
#include <string>

namespace lungaug {

// Broad failure classes. The CLI maps them onto its exit codes
// (validation -> 1, data/io -> 2).
enum class ErrorKind { validation, data, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::validation, what);
}

inline Error data_error(const std::string& what) {
  return Error(ErrorKind::data, what);
}

inline Error io_error(const std::string& what) {
  return Error(ErrorKind::io, what);
}

}  // namespace lungaug
