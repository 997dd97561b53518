#pragma once

#include <vector>

#include "tdcfem/core.hpp"

namespace tdcfem {

// All per-point geometric and differential quantities of a manifold point in
// one value. A frame is produced either from a parametric map (Jacobian
// route) or from level-set gradients (deformation-gradient route); fields
// that exist on one route only stay empty on the other.
struct PointFrame {
  int q = 0;  // manifold dimension
  int d = 0;  // ambient dimension

  // parametric route
  Mat J, j;      // d x q Jacobians, undeformed / deformed
  Mat G, g;      // q x q first fundamental forms
  Mat Q, q_op;   // d x q: J G^-1 and j g^-1
  double sqrt_det_G = 0.0;

  // implicit route
  Mat F_omega;   // d x d classical deformation gradient
  double det_F_omega = 0.0;
  std::vector<Vec> N_star, n_star;  // level-set gradients; for codimension 2
                                    // the orthogonalized third vector is appended

  // common
  std::vector<Vec> T_star, t_star;  // tangent vectors
  Vec T3_star, t3_star;             // orthogonalized second tangent (q=2, d=3)
  Vec N, n;                         // unit normals (codimension 1, else empty)
  Mat P, p;                         // projectors onto tangent spaces
  Mat F_gamma;                      // d x d surface deformation gradient
  double Lambda = 1.0;              // line/area stretch
  Mat W;                            // pullback to the deformed surface gradient
};

// 3-vector cross product on the fixed-capacity vector type
inline Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c[0] = a[1] * b[2] - a[2] * b[1];
  c[1] = a[2] * b[0] - a[0] * b[2];
  c[2] = a[0] * b[1] - a[1] * b[0];
  return c;
}

}  // namespace tdcfem
