#include "tdcfem/geom_implicit.hpp"

#include <cmath>

namespace tdcfem {

namespace {

void check_on_manifold(const ImplicitGeometry& geom, const Vec& X) {
  const double eps_gamma = 1e-8 * (geom.box_hi - geom.box_lo).norm();
  for (const auto& ls : geom.phi) {
    if (std::abs(ls.value(X)) > eps_gamma)
      fail(ErrorCode::InvalidInput, "point not on the discrete manifold");
  }
}

}  // namespace

PointFrame frame_from_gradients(int d, int codim, const std::vector<Vec>& grad_phi,
                                const Mat& grad_X_u) {
  PointFrame f;
  f.d = d;
  f.q = d - codim;

  f.F_omega = Mat::Identity(d, d) + grad_X_u;
  f.det_F_omega = f.F_omega.determinant();
  if (f.det_F_omega <= kDegenerateTol)
    fail(ErrorCode::SingularDeformation, "det F below tolerance");
  Mat FinvT = f.F_omega.inverse().transpose();

  if (codim == 1) {
    const Vec& Nstar = grad_phi[0];
    if (Nstar.norm() <= kDegenerateTol)
      fail(ErrorCode::ZeroGradient, "level-set gradient vanishes");
    Vec nstar = FinvT * Nstar;
    f.N_star = {Nstar};
    f.n_star = {nstar};
    f.N = Nstar.normalized();
    f.n = nstar.normalized();
    f.P = Mat::Identity(d, d) - f.N * f.N.transpose();
    f.p = Mat::Identity(d, d) - f.n * f.n.transpose();
    f.Lambda = (nstar.norm() / Nstar.norm()) * f.det_F_omega;
  } else {
    const Vec& N1 = grad_phi[0];
    const Vec& N2 = grad_phi[1];
    if (cross3(N1, N2).norm() <= kDegenerateTol * N1.norm() * N2.norm())
      fail(ErrorCode::ParallelGradients, "level-set gradients parallel");
    Vec n1 = FinvT * N1;
    Vec n2 = FinvT * N2;
    Vec Tstar = cross3(N2, N1);
    Vec tstar = cross3(n2, n1);
    Vec N3 = N2 - (N1.dot(N2) / N1.dot(N1)) * N1;
    Vec n3 = n2 - (n1.dot(n2) / n1.dot(n1)) * n1;
    f.N_star = {N1, N2, N3};
    f.n_star = {n1, n2, n3};
    f.T_star = {Tstar};
    f.t_star = {tstar};
    Vec N1u = N1.normalized(), N3u = N3.normalized();
    Vec n1u = n1.normalized(), n3u = n3.normalized();
    f.P = Mat::Identity(d, d) - N1u * N1u.transpose() - N3u * N3u.transpose();
    f.p = Mat::Identity(d, d) - n1u * n1u.transpose() - n3u * n3u.transpose();
    f.Lambda = (tstar.norm() / Tstar.norm()) * f.det_F_omega;
  }

  f.F_gamma = Mat::Identity(d, d) + grad_X_u * f.P;
  f.W = f.p * FinvT;
  return f;
}

PointFrame impl_frame_codim1(const ImplicitGeometry& geom, const Vec& X, const Vec& /*u*/,
                             const Mat& grad_X_u) {
  check_on_manifold(geom, X);
  return frame_from_gradients(geom.d, 1, {geom.phi[0].gradient(X)}, grad_X_u);
}

PointFrame impl_frame_codim2(const ImplicitGeometry& geom, const Vec& X, const Vec& /*u*/,
                             const Mat& grad_X_u) {
  check_on_manifold(geom, X);
  return frame_from_gradients(geom.d, 2, {geom.phi[0].gradient(X), geom.phi[1].gradient(X)},
                              grad_X_u);
}

Vec extend_normal_field(const ImplicitGeometry& geom, const Vec& X) {
  Vec g = geom.phi[0].gradient(X);
  const double n = g.norm();
  if (n <= kDegenerateTol) fail(ErrorCode::ZeroGradient, "level-set gradient vanishes");
  return g / n;
}

}  // namespace tdcfem
