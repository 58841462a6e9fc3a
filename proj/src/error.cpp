#include "cutsteer/error.hpp"

namespace cutsteer {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_order: return "invalid_order";
    case ErrorCode::unsupported_dimension: return "unsupported_dimension";
    case ErrorCode::construction: return "construction";
    case ErrorCode::shape: return "shape";
    case ErrorCode::invalid_weight: return "invalid_weight";
    case ErrorCode::degenerate_axis: return "degenerate_axis";
    case ErrorCode::propagation: return "propagation";
    case ErrorCode::unsupported_elements: return "unsupported_elements";
    case ErrorCode::periodicity: return "periodicity";
    case ErrorCode::binding: return "binding";
    case ErrorCode::solver: return "solver";
    case ErrorCode::reference: return "reference";
    case ErrorCode::build: return "build";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
    case ErrorCode::missing_policy: return "missing_policy";
    case ErrorCode::unknown_preset: return "unknown_preset";
    case ErrorCode::sampling: return "sampling";
  }
  return "unknown";
}

}  // namespace cutsteer
