#pragma once

#include <stdexcept>
#include <string>

namespace cutsteer {

enum class ErrorCode {
  invalid_argument,
  invalid_order,
  unsupported_dimension,
  construction,
  shape,
  invalid_weight,
  degenerate_axis,
  propagation,
  unsupported_elements,
  periodicity,
  binding,
  solver,
  reference,
  build,
  schema,
  io,
  missing_policy,
  unknown_preset,
  sampling,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const { return code_; }
  const std::string& context() const { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace cutsteer
