#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazenet {

// Coarse failure classes. The CLI prints the category name as the first token
// of its one-line error message so callers can dispatch on it.
enum class ErrorCategory {
  InvalidArgument,
  Io,
  Format,
  Data,
  Shape,
  Numeric,
  MissingStage,
  Config,
};

std::string_view category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

}  // namespace gazenet
