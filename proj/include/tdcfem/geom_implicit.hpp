#pragma once

#include <functional>
#include <vector>

#include "tdcfem/frame.hpp"

namespace tdcfem {

struct LevelSet {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;  // optional; needed for strong-form residuals
};

// Manifold defined as the zero set of one (codimension 1) or two
// (codimension 2) level-set functions, bounded by the domain box and by
// optional slave level sets psi_i >= 0.
struct ImplicitGeometry {
  int d = 3;
  int codim = 1;
  std::vector<LevelSet> phi;  // 1 or 2 master level sets
  std::vector<LevelSet> psi;  // slave level sets; kept part has psi_i >= 0
  Vec box_lo, box_hi;         // domain of definition
};

// Frame from raw level-set gradients and the ambient displacement gradient;
// shared by the analytic wrappers and by discrete interpolated level sets.
PointFrame frame_from_gradients(int d, int codim, const std::vector<Vec>& grad_phi,
                                const Mat& grad_X_u);

// Analytic wrappers; X must lie on the zero set (within 1e-8 of the box
// diagonal).
PointFrame impl_frame_codim1(const ImplicitGeometry& geom, const Vec& X, const Vec& u,
                             const Mat& grad_X_u);
PointFrame impl_frame_codim2(const ImplicitGeometry& geom, const Vec& X, const Vec& u,
                             const Mat& grad_X_u);

// Unit gradient field of the first level set, defined on and off the zero set.
Vec extend_normal_field(const ImplicitGeometry& geom, const Vec& X);

// Surface gradients through an implicit-route frame.
inline Vec surface_gradient_scalar(const PointFrame& f, const Vec& grad_X_f) {
  return f.P * grad_X_f;
}
inline Mat directional_gradient_vector(const PointFrame& f, const Mat& grad_X_u) {
  return grad_X_u * f.P;
}
inline Vec deformed_surface_gradient_scalar(const PointFrame& f, const Vec& grad_X_f) {
  return f.W * grad_X_f;
}

}  // namespace tdcfem
