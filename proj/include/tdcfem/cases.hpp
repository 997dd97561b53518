#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tdcfem/fem_surface.hpp"
#include "tdcfem/fem_trace.hpp"
#include "tdcfem/solver.hpp"

namespace tdcfem {

// Built-in benchmark cases. Geometry, materials, loads and supports are
// defined in code; a ladder entry is the subdivision parameter n of one
// refinement level (elements per patch edge for surface parts, background
// cells along the first axis for immersed runs).
struct CaseInfo {
  std::string id;
  std::string title;
  bool has_surface = false;
  bool has_trace = false;
  bool solve = true;  // false: prescribed displacement, energy evaluation only
  std::vector<int> surface_ladder;
  std::vector<int> trace_ladder;
  double reference_energy = std::numeric_limits<double>::quiet_NaN();
  double reference_stretch = std::numeric_limits<double>::quiet_NaN();
  std::string reference_note;  // provenance of the reference values
};

const std::vector<CaseInfo>& case_registry();
const CaseInfo& find_case(const std::string& id);  // throws InvalidInput

// Assembled problems for one refinement level. Throws InvalidInput when the
// case does not support the requested discretization.
SurfaceProblem build_surface_case(const std::string& id, int n, int p);
TraceProblem build_trace_case(const std::string& id, int n, int p, double rho = -1.0);

// Prescribed displacement field for non-solved cases; null otherwise.
std::function<Vec(const Vec&)> case_displacement(const std::string& id);

// Solver configuration appropriate for the case (pretension continuation for
// the sagging rope, load stepping for the pressurized membrane).
NewtonConfig case_newton_config(const std::string& id);

}  // namespace tdcfem
