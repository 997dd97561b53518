#pragma once

#include "tdcfem/mechanics.hpp"

namespace tdcfem {

// Pointwise residual/tangent/energy contributions of the Saint Venant-
// Kirchhoff surface material, shared by the conforming and immersed
// assemblers. Inputs at one quadrature point:
//   w        weight including eta and the measure factor
//   N        basis values (n_en)
//   g        tangential basis gradients, d x n_en (columns g^a)
//   F_gamma  surface deformation gradient I + sum_a u_a (g^a)^T
//   P        undeformed tangent projector
//   s0       pretension added to the stress as s0 P (continuation aid)
//   body     dead load per unit eta and undeformed measure (already scaled)
// The tangent is the exact linearization of the residual, including the
// geometric stiffness through the stress and the material stiffness.
inline void svk_point(const MaterialModel& m, double s0, double w, const Eigen::VectorXd& N,
                      const Eigen::MatrixXd& g, const Mat& F_gamma, const Mat& P,
                      const Vec& body, const Vec& u_interp, Eigen::VectorXd* r_el,
                      Eigen::MatrixXd* K_el, double* potential, double* senergy) {
  const int d = static_cast<int>(F_gamma.rows());
  const int nen = static_cast<int>(N.size());

  Mat C = F_gamma.transpose() * F_gamma;
  Mat E_dir = 0.5 * (C - Mat::Identity(d, d));
  Mat E_t = P * E_dir * P;
  const double trE = E_t.trace();
  Mat S = (m.lambda * trE) * P + (2.0 * m.mu) * E_t;
  const double se = 0.5 * (S.array() * E_t.array()).sum();

  if (senergy) *senergy += w * se;
  if (potential) *potential += w * (se + s0 * trE - (body.size() ? body.dot(u_interp) : 0.0));
  if (!r_el && !K_el) return;

  Mat S_t = S;
  if (s0 != 0.0) S_t += s0 * P;
  if (r_el) {
    Mat Kt = F_gamma * S_t;
    for (int a = 0; a < nen; ++a) {
      Vec kg = Kt * g.col(a);
      for (int i = 0; i < d; ++i)
        (*r_el)[a * d + i] += w * (kg[i] - (body.size() ? N[a] * body[i] : 0.0));
    }
  }
  if (K_el) {
    Mat B = F_gamma * P * F_gamma.transpose();
    Eigen::MatrixXd f = F_gamma * g;                 // d x nen
    Eigen::MatrixXd gg = g.transpose() * g;          // n_en x n_en
    Eigen::MatrixXd sab = g.transpose() * S_t * g;   // n_en x n_en
    for (int a = 0; a < nen; ++a)
      for (int b = 0; b < nen; ++b)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            (*K_el)(a * d + i, b * d + j) +=
                w * ((i == j ? sab(a, b) : 0.0) + m.lambda * f(i, a) * f(j, b) +
                     m.mu * gg(a, b) * B(i, j) + m.mu * f(j, a) * f(i, b));
  }
}

}  // namespace tdcfem
