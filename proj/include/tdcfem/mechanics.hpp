#pragma once

#include <functional>

#include "tdcfem/geom_parametric.hpp"

namespace tdcfem {

// Saint Venant-Kirchhoff material. eta is the measure factor that scales the
// governing integrals: cross-section area for ropes, thickness for membranes,
// 1 for volumetric sanity checks.
struct MaterialModel {
  double lambda = 0.0;
  double mu = 0.0;
  double eta = 1.0;

  // ropes carry no lateral contraction: lambda = 0, mu = E/2
  static MaterialModel rope(double E, double A);
  // plane-stress reduction: lambda = E nu / (1 - nu^2)
  static MaterialModel membrane_plane_stress(double E, double nu, double t);
  // 3-D conversion: lambda = E nu / ((1 + nu)(1 - 2 nu))
  static MaterialModel membrane_3d(double E, double nu, double t);
};

struct StressStrainState {
  Mat E_dir, E_tang;  // Green-Lagrange, directional and tangential
  Mat e_dir, e_tang;  // Euler-Almansi, directional and tangential
  Mat S;              // 2nd Piola-Kirchhoff
  Mat K;              // 1st Piola-Kirchhoff
  Mat sigma;          // Cauchy
};

void strains(const PointFrame& f, StressStrainState& out);
void stresses(const MaterialModel& m, const PointFrame& f, StressStrainState& inout);
StressStrainState stress_strain(const MaterialModel& m, const PointFrame& f);

// 1/2 S : E_tang, per unit undeformed measure, before the eta factor.
double strain_energy_density(const MaterialModel& m, const PointFrame& f);

// |S:E_tang - (sigma:e_tang) Lambda|; the two work densities must agree.
double energy_conjugacy_check(const StressStrainState& s, double Lambda);

// von Mises stress from the Cauchy tensor (padded to 3x3 for d = 2).
double von_mises(const Mat& sigma);

// Conormal vectors (unit, in the tangent plane, normal to the manifold
// boundary, outward).
// Parametric route: nu_ref points out of the reference domain across the
// boundary; tau_ref spans the boundary face (ignored for q = 1).
void conormal_param(const PointFrame& f, const Vec& nu_ref, const Vec& tau_ref, Vec& N_b,
                    Vec& n_b);
// Implicit route: m is an outward direction at the boundary (e.g. the domain
// face normal); returns the undeformed conormal.
Vec conormal_impl(const PointFrame& f, const Vec& m);

// Stretch of the boundary measure; relates deformed-configuration traction
// data to undeformed-configuration traction: H = Lambda_bar * h.
// q = 1: boundary points, Lambda_bar = 1. q = 2: boundary line stretch along
// the boundary direction tau_ref.
double boundary_stretch(const PointFrame& f, const Vec& tau_ref);

// Deformed-configuration traction data must lie in the deformed tangent
// space; data violating this is rejected rather than silently projected.
void validate_deformed_traction(const PointFrame& f, const Vec& h, double tol = 1e-10);

// Defect of the divergence theorem on a parametric patch, integrated with
// n_cells^q cells and n_gauss^q points per cell:
//   | int u . Div_G A  + int grad^dir u : A - int kappa u . A . N - bnd int u . A . N_b |
// The curvature term uses kappa = tr(grad^dir N) evaluated by central
// differences of the frame normal in reference coordinates.
double divergence_theorem_check(const ParametricPatch& patch,
                                const std::function<Mat(const Vec&)>& A_of_X,
                                const std::function<Vec(const Vec&)>& u_of_X, int n_cells,
                                int n_gauss);

}  // namespace tdcfem
