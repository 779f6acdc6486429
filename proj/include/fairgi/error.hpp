#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairgi {

enum class ErrorKind {
  kStructuralInput,
  kValidation,
  kConfig,
  kShape,
  kDegenerateInput,
  kNumeric,
  kParse,
  kSchema,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can map it
// onto an exit code and a machine-readable record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace fairgi
