#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace tdcfem {

// Ambient and reference dimensions never exceed 3, so fixed-capacity dynamic
// matrices keep the per-point kernels free of heap allocations while still
// supporting d in {2,3} and q in {1,2,3} with one type.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr double kDegenerateTol = 1e-14;

enum class ErrorCode {
  SingularMetric,
  DegenerateDeformation,
  SingularDeformation,
  ZeroGradient,
  ParallelGradients,
  UnsupportedOrder,
  NoIntersection,
  DegenerateCut,
  DanglingInterface,
  EmptyTrace,
  NonConvergedCut,
  NoConvergence,
  SingularTangent,
  MissingReference,
  InvalidInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace tdcfem
