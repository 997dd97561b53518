#pragma once

#include <functional>

#include "tdcfem/frame.hpp"

namespace tdcfem {

// Manifold given by a map r in Omega_r subset R^q -> X in R^d over a box
// reference domain. Non-box reference regions (disk) are realized upstream by
// remapping a box (polar coordinates), so all meshing happens on boxes.
struct ParametricPatch {
  int q = 0, d = 0;
  std::function<Vec(const Vec&)> map;           // r -> X
  std::function<Mat(const Vec&)> map_jacobian;  // r -> d x q; empty => FD fallback
  Vec ref_lo, ref_hi;                           // reference box
};

// Central finite-difference Jacobian fallback for user-defined maps.
Mat fd_map_jacobian(const std::function<Vec(const Vec&)>& map, int d, const Vec& r,
                    double step = 1e-7);

Mat patch_jacobian(const ParametricPatch& patch, const Vec& r);

// J, G = J^T J (first fundamental form), Q = J G^-1.
void param_operators(const ParametricPatch& patch, const Vec& r, Mat& J, Mat& G, Mat& Q);

// Q * grad_r f; lies in the tangent space.
Vec param_surface_gradient_scalar(const Mat& Q, const Vec& grad_r_f);

// grad_r u * Q^T; annihilates the normal from the right (codimension 1).
Mat param_directional_gradient_vector(const Mat& grad_r_u, const Mat& Q);

// Full frame from a Jacobian and the reference gradient of the displacement.
// Used directly by isoparametric assembly, where J comes from the element map.
PointFrame frame_from_jacobian(int q, int d, const Mat& J, const Mat& grad_r_u);

// Full frame at a reference point of a patch; pass u = 0, grad_r_u = 0 for the
// undeformed state.
PointFrame param_frame(const ParametricPatch& patch, const Vec& r, const Vec& u,
                       const Mat& grad_r_u);

}  // namespace tdcfem
