#include "tdcfem/geom_parametric.hpp"

#include <cmath>

namespace tdcfem {

Mat fd_map_jacobian(const std::function<Vec(const Vec&)>& map, int d, const Vec& r,
                    double step) {
  const int q = static_cast<int>(r.size());
  Mat J(d, q);
  for (int k = 0; k < q; ++k) {
    Vec rp = r, rm = r;
    rp[k] += step;
    rm[k] -= step;
    J.col(k) = (map(rp) - map(rm)) / (2.0 * step);
  }
  return J;
}

Mat patch_jacobian(const ParametricPatch& patch, const Vec& r) {
  if (patch.map_jacobian) return patch.map_jacobian(r);
  return fd_map_jacobian(patch.map, patch.d, r);
}

void param_operators(const ParametricPatch& patch, const Vec& r, Mat& J, Mat& G, Mat& Q) {
  J = patch_jacobian(patch, r);
  G = J.transpose() * J;
  if (G.determinant() <= kDegenerateTol)
    fail(ErrorCode::SingularMetric, "det G below tolerance; degenerate parametrization");
  Q = J * G.inverse();
}

Vec param_surface_gradient_scalar(const Mat& Q, const Vec& grad_r_f) { return Q * grad_r_f; }

Mat param_directional_gradient_vector(const Mat& grad_r_u, const Mat& Q) {
  return grad_r_u * Q.transpose();
}

PointFrame frame_from_jacobian(int q, int d, const Mat& J, const Mat& grad_r_u) {
  PointFrame f;
  f.q = q;
  f.d = d;
  f.J = J;
  f.G = J.transpose() * J;
  const double detG = f.G.determinant();
  if (detG <= kDegenerateTol)
    fail(ErrorCode::SingularMetric, "det G below tolerance; degenerate parametrization");
  f.sqrt_det_G = std::sqrt(detG);
  Mat Ginv = f.G.inverse();
  f.Q = J * Ginv;

  f.F_gamma = Mat::Identity(d, d) + grad_r_u * f.Q.transpose();
  f.j = J + grad_r_u;
  f.g = f.j.transpose() * f.j;
  const double detg = f.g.determinant();
  if (detg <= kDegenerateTol)
    fail(ErrorCode::DegenerateDeformation, "det g below tolerance; element inverted or collapsed");
  f.Lambda = std::sqrt(detg / detG);

  Mat ginv = f.g.inverse();
  f.q_op = f.j * ginv;
  f.P = J * Ginv * J.transpose();
  f.p = f.j * ginv * f.j.transpose();

  f.T_star.resize(q);
  f.t_star.resize(q);
  for (int k = 0; k < q; ++k) {
    f.T_star[k] = J.col(k);
    f.t_star[k] = f.j.col(k);
  }
  if (q == 2 && d == 3) {
    const Vec &T1 = f.T_star[0], &T2 = f.T_star[1];
    f.T3_star = T2 - (T1.dot(T2) / T1.dot(T1)) * T1;
    const Vec &t1 = f.t_star[0], &t2 = f.t_star[1];
    f.t3_star = t2 - (t1.dot(t2) / t1.dot(t1)) * t1;
  }

  if (q == d - 1) {
    if (d == 2) {
      Vec T = J.col(0);
      f.N = Vec(2);
      f.N << -T[1], T[0];
      f.N.normalize();
      Vec t = f.j.col(0);
      f.n = Vec(2);
      f.n << -t[1], t[0];
      f.n.normalize();
    } else {
      f.N = cross3(J.col(0), J.col(1));
      f.N.normalize();
      f.n = cross3(f.j.col(0), f.j.col(1));
      f.n.normalize();
    }
  }

  // W = q_op (Q^T Q)^-1 Q^T via the small SPD system (Q^T Q) Y = Q^T.
  Mat QtQ = f.Q.transpose() * f.Q;
  Mat Y = QtQ.ldlt().solve(Mat(f.Q.transpose()));
  f.W = f.q_op * Y;
  return f;
}

PointFrame param_frame(const ParametricPatch& patch, const Vec& r, const Vec& /*u*/,
                       const Mat& grad_r_u) {
  Mat J = patch_jacobian(patch, r);
  return frame_from_jacobian(patch.q, patch.d, J, grad_r_u);
}

}  // namespace tdcfem
