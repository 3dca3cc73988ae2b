#include "gazenet/error.hpp"

namespace gazenet {

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Shape: return "shape";
    case ErrorCategory::Numeric: return "numeric";
    case ErrorCategory::MissingStage: return "missing-stage";
    case ErrorCategory::Config: return "config";
  }
  return "unknown";
}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace gazenet
