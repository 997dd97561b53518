#include "tdcfem/core.hpp"

namespace tdcfem {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::DegenerateDeformation: return "DegenerateDeformation";
    case ErrorCode::SingularDeformation: return "SingularDeformation";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::ParallelGradients: return "ParallelGradients";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::DegenerateCut: return "DegenerateCut";
    case ErrorCode::DanglingInterface: return "DanglingInterface";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NonConvergedCut: return "NonConvergedCut";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularTangent: return "SingularTangent";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tdcfem
