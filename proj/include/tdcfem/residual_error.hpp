#pragma once

#include "tdcfem/fem_surface.hpp"
#include "tdcfem/fem_trace.hpp"

namespace tdcfem {

// Pointwise strong-form equilibrium data of a discrete displacement field,
// evaluated in the interior of one element. Both divergence routes are
// computed: the undeformed-configuration route Div_Gamma K and the deformed
// route div_gamma sigma, related by Div_Gamma K = Lambda * div_gamma sigma.
struct EquilibriumPoint {
  Vec div_K;      // row-wise surface divergence of K = F_Gamma * S w.r.t. X
  Vec div_sigma;  // row-wise surface divergence of the Cauchy stress w.r.t. x
  Vec r_strong;   // div_sigma + f(x), f per unit eta and deformed measure
  double Lambda = 1.0;
};

// Evaluates the strong-form residual of the interpolated displacement ufull
// (full dof vector, d entries per global node) at reference point xi of one
// element. Requires element order p >= 2 because second derivatives of the
// shape functions enter.
EquilibriumPoint equilibrium_at(const SurfaceProblem& prob, const Eigen::VectorXd& ufull,
                                int part, int elem, const Vec& xi, double pretension = 0.0);

// sqrt of the sum over elements of the integral of |div_gamma sigma + f|^2
// over the undeformed element. Integration is element by element because the
// integrand jumps across element boundaries. Gauss p+2 points per direction.
double residual_error(const SurfaceProblem& prob, const Eigen::VectorXd& ufull,
                      double pretension = 0.0);

// Same strong-form equilibrium data for the immersed discretization, at a
// reference point of one active background element. All derivatives are
// ambient; the surface divergence projects them with P = I - N N^T built
// from the discrete level set. div_sigma is recovered from the exact
// identity div_gamma sigma = Div_Gamma K / Lambda.
EquilibriumPoint equilibrium_at(const TraceAssembler& assembler, const Eigen::VectorXd& ufree,
                                int active_elem, const Vec& xi, double pretension = 0.0);

// Immersed counterpart of residual_error: integrates |div_gamma sigma + f|^2
// over the recovered zero set with the stored cut-cell rules.
double residual_error(const TraceAssembler& assembler, const Eigen::VectorXd& ufree,
                      double pretension = 0.0);

}  // namespace tdcfem
