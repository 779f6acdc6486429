#include "fairgi/error.hpp"

namespace fairgi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kStructuralInput: return "structural_input";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDegenerateInput: return "degenerate_input";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace fairgi
