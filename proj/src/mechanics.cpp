#include "tdcfem/mechanics.hpp"

#include <cmath>

#include "tdcfem/quadrature.hpp"

namespace tdcfem {

MaterialModel MaterialModel::rope(double E, double A) {
  MaterialModel m;
  m.lambda = 0.0;
  m.mu = 0.5 * E;
  m.eta = A;
  return m;
}

MaterialModel MaterialModel::membrane_plane_stress(double E, double nu, double t) {
  MaterialModel m;
  m.lambda = E * nu / (1.0 - nu * nu);
  m.mu = E / (2.0 * (1.0 + nu));
  m.eta = t;
  return m;
}

MaterialModel MaterialModel::membrane_3d(double E, double nu, double t) {
  MaterialModel m;
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  m.mu = E / (2.0 * (1.0 + nu));
  m.eta = t;
  return m;
}

void strains(const PointFrame& f, StressStrainState& out) {
  const int d = f.d;
  const Mat& F = f.F_gamma;
  out.E_dir = 0.5 * (F.transpose() * F - Mat::Identity(d, d));
  out.E_tang = f.P * out.E_dir * f.P;
  Mat FFt = F * F.transpose();
  if (FFt.determinant() <= kDegenerateTol)
    fail(ErrorCode::SingularDeformation, "F F^T not invertible");
  out.e_dir = 0.5 * (Mat::Identity(d, d) - FFt.inverse());
  out.e_tang = f.p * out.e_dir * f.p;
}

void stresses(const MaterialModel& m, const PointFrame& f, StressStrainState& s) {
  s.S = m.lambda * s.E_tang.trace() * f.P + 2.0 * m.mu * s.E_tang;
  s.K = f.F_gamma * s.S;
  s.sigma = (1.0 / f.Lambda) * f.F_gamma * s.S * f.F_gamma.transpose();
}

StressStrainState stress_strain(const MaterialModel& m, const PointFrame& f) {
  StressStrainState s;
  strains(f, s);
  stresses(m, f, s);
  return s;
}

double strain_energy_density(const MaterialModel& m, const PointFrame& f) {
  StressStrainState s = stress_strain(m, f);
  return 0.5 * (s.S.array() * s.E_tang.array()).sum();
}

double energy_conjugacy_check(const StressStrainState& s, double Lambda) {
  const double a = (s.S.array() * s.E_tang.array()).sum();
  const double b = (s.sigma.array() * s.e_tang.array()).sum() * Lambda;
  return std::abs(a - b);
}

double von_mises(const Mat& sigma) {
  Eigen::Matrix3d full = Eigen::Matrix3d::Zero();
  full.topLeftCorner(sigma.rows(), sigma.cols()) = sigma;
  Eigen::Matrix3d dev = full - (full.trace() / 3.0) * Eigen::Matrix3d::Identity();
  return std::sqrt(1.5 * (dev.array() * dev.array()).sum());
}

void conormal_param(const PointFrame& f, const Vec& nu_ref, const Vec& tau_ref, Vec& N_b,
                    Vec& n_b) {
  Vec wu = f.J * nu_ref;
  Vec wd = f.j * nu_ref;
  if (f.q == 1) {
    N_b = wu.normalized();
    n_b = wd.normalized();
    return;
  }
  Vec tu = f.J * tau_ref;
  Vec td = f.j * tau_ref;
  N_b = (wu - tu * (tu.dot(wu) / tu.dot(tu))).normalized();
  n_b = (wd - td * (td.dot(wd) / td.dot(td))).normalized();
}

Vec conormal_impl(const PointFrame& f, const Vec& m) {
  if (f.q == 1) {
    // tangent direction of the curve, oriented outward
    Vec T;
    if (!f.T_star.empty()) {
      T = f.T_star[0].normalized();
    } else if (f.d == 2) {
      T = Vec(2);
      T << -f.N[1], f.N[0];
    } else {
      fail(ErrorCode::InvalidInput, "conormal needs a tangent direction");
    }
    return T * (T.dot(m) >= 0 ? 1.0 : -1.0);
  }
  Vec c = f.P * m;
  const double n = c.norm();
  if (n <= kDegenerateTol)
    fail(ErrorCode::InvalidInput, "outward direction orthogonal to the tangent plane");
  return c / n;
}

double boundary_stretch(const PointFrame& f, const Vec& tau_ref) {
  if (f.q == 1) return 1.0;
  return (f.j * tau_ref).norm() / (f.J * tau_ref).norm();
}

void validate_deformed_traction(const PointFrame& f, const Vec& h, double tol) {
  if (h.norm() == 0.0) return;
  if ((h - f.p * h).norm() > tol * h.norm())
    fail(ErrorCode::InvalidInput, "traction not in the deformed tangent space");
}

double divergence_theorem_check(const ParametricPatch& patch,
                                const std::function<Mat(const Vec&)>& A_of_X,
                                const std::function<Vec(const Vec&)>& u_of_X, int n_cells,
                                int n_gauss) {
  const int q = patch.q, d = patch.d;
  const double fd_step = 1e-6;
  Vec zero_u = Vec::Zero(d);
  Mat zero_grad = Mat::Zero(d, q);

  auto frame_at = [&](const Vec& r) { return param_frame(patch, r, zero_u, zero_grad); };

  // grad_r of an ambient field composed with the map, by central differences
  auto grad_r_of = [&](const std::function<Vec(const Vec&)>& fn, const Vec& r) {
    Mat g(d, q);
    for (int k = 0; k < q; ++k) {
      Vec rp = r, rm = r;
      rp[k] += fd_step;
      rm[k] -= fd_step;
      g.col(k) = (fn(patch.map(rp)) - fn(patch.map(rm))) / (2.0 * fd_step);
    }
    return g;
  };

  QuadRule rule = gauss_rule(q, n_gauss);
  Vec widths = patch.ref_hi - patch.ref_lo;
  Vec cell(q);
  for (int k = 0; k < q; ++k) cell[k] = widths[k] / n_cells;

  double surface_sum = 0.0;
  int total_cells = 1;
  for (int k = 0; k < q; ++k) total_cells *= n_cells;
  for (int c = 0; c < total_cells; ++c) {
    int rest = c;
    Vec lo(q);
    for (int k = 0; k < q; ++k) {
      lo[k] = patch.ref_lo[k] + (rest % n_cells) * cell[k];
      rest /= n_cells;
    }
    for (int iq = 0; iq < rule.points.rows(); ++iq) {
      Vec r(q);
      double wref = rule.weights[iq];
      for (int k = 0; k < q; ++k) {
        r[k] = lo[k] + 0.5 * (rule.points(iq, k) + 1.0) * cell[k];
        wref *= 0.5 * cell[k];
      }
      PointFrame f = frame_at(r);
      Vec X = patch.map(r);
      Mat A = A_of_X(X);
      Vec u = u_of_X(X);

      // Div_G A, row-wise: (Div_G A)_i = sum_jk dA_ij/dr_k Q_jk
      Vec divA = Vec::Zero(d);
      for (int k = 0; k < q; ++k) {
        Vec rp = r, rm = r;
        rp[k] += fd_step;
        rm[k] -= fd_step;
        Mat dA = (A_of_X(patch.map(rp)) - A_of_X(patch.map(rm))) / (2.0 * fd_step);
        for (int i = 0; i < d; ++i)
          for (int jj = 0; jj < d; ++jj) divA[i] += dA(i, jj) * f.Q(jj, k);
      }

      Mat grad_dir_u = grad_r_of(u_of_X, r) * f.Q.transpose();

      double kappa = 0.0;
      Vec AN = Vec::Zero(d);
      if (f.N.size() > 0) {
        // kappa = tr(grad^dir N) by central differences of the frame normal
        Mat dN(d, q);
        for (int k = 0; k < q; ++k) {
          Vec rp = r, rm = r;
          rp[k] += fd_step;
          rm[k] -= fd_step;
          dN.col(k) = (frame_at(rp).N - frame_at(rm).N) / (2.0 * fd_step);
        }
        kappa = (dN * f.Q.transpose()).trace();
        AN = A * f.N;
      }

      const double dGamma = wref * f.sqrt_det_G;
      surface_sum += dGamma * (u.dot(divA) + (grad_dir_u.array() * A.array()).sum() -
                               kappa * u.dot(AN));
    }
  }

  // boundary integral over the faces of the reference box
  double boundary_sum = 0.0;
  if (q == 1) {
    for (int side = 0; side < 2; ++side) {
      Vec r(1);
      r[0] = (side == 0) ? patch.ref_lo[0] : patch.ref_hi[0];
      PointFrame f = frame_at(r);
      Vec nu(1);
      nu[0] = (side == 0) ? -1.0 : 1.0;
      Vec N_b, n_b;
      conormal_param(f, nu, Vec(), N_b, n_b);
      Vec X = patch.map(r);
      boundary_sum += u_of_X(X).dot(A_of_X(X) * N_b);
    }
  } else {
    QuadRule line = gauss_rule(1, n_gauss);
    for (int axis = 0; axis < 2; ++axis) {
      const int other = 1 - axis;
      for (int side = 0; side < 2; ++side) {
        for (int c = 0; c < n_cells; ++c) {
          for (int iq = 0; iq < line.points.rows(); ++iq) {
            Vec r(2);
            r[axis] = (side == 0) ? patch.ref_lo[axis] : patch.ref_hi[axis];
            r[other] =
                patch.ref_lo[other] + (c + 0.5 * (line.points(iq, 0) + 1.0)) * cell[other];
            PointFrame f = frame_at(r);
            Vec nu = Vec::Zero(2), tau = Vec::Zero(2);
            nu[axis] = (side == 0) ? -1.0 : 1.0;
            tau[other] = 1.0;
            Vec N_b, n_b;
            conormal_param(f, nu, tau, N_b, n_b);
            double ds = (f.J * tau).norm() * 0.5 * cell[other] * line.weights[iq];
            Vec X = patch.map(r);
            boundary_sum += ds * u_of_X(X).dot(A_of_X(X) * N_b);
          }
        }
      }
    }
  }

  return std::abs(surface_sum - boundary_sum);
}

}  // namespace tdcfem
