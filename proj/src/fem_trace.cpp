#include "tdcfem/fem_trace.hpp"

#include <cmath>
#include <vector>

#include "tdcfem/svk_kernel.hpp"

namespace tdcfem {

TraceAssembler::TraceAssembler(TraceProblem problem) : prob_(std::move(problem)) {
  const BackgroundMesh& mesh = prob_.mesh;
  d_ = mesh.d;
  if (prob_.phi.size() != mesh.n_nodes())
    fail(ErrorCode::InvalidInput, "level-set nodal vector does not match mesh");
  if (prob_.loads.pressure != 0.0)
    fail(ErrorCode::InvalidInput, "pressure loading not supported in the immersed assembler");
  if (prob_.loads.body_force.size() && prob_.loads.body_force.size() != d_)
    fail(ErrorCode::InvalidInput, "body force dimension mismatch");
  has_nitsche_ = static_cast<bool>(prob_.dirichlet);
  if (has_nitsche_ && d_ != 2)
    fail(ErrorCode::InvalidInput,
         "weak boundary conditions are implemented for curve cuts (d = 2)");
  const Eigen::VectorXd* psi = prob_.psi.size() ? &prob_.psi : nullptr;
  if (psi && prob_.psi.size() != mesh.n_nodes())
    fail(ErrorCode::InvalidInput, "clip nodal vector does not match mesh");
  geo_ = detect_active(mesh, prob_.phi, mesh.p + 2, nullptr, psi, has_nitsche_);
  anode_ids_ = geo_.active_nodes;
  anode_index_.assign(mesh.n_nodes(), -1);
  for (std::size_t i = 0; i < anode_ids_.size(); ++i)
    anode_index_[anode_ids_[i]] = static_cast<int>(i);
  rho_ = prob_.rho < 0.0 ? 1000.0 / mesh.h_max() : prob_.rho;
  // stabilization rule and shape cache; reference points are shared by all
  // elements of the structured mesh, so physical gradients are cached too
  vol_rule_ = gauss_rule(d_, mesh.p + 1);
  const int nen = mesh.nodes_per_elem();
  Vec inv_h(d_);
  for (int k = 0; k < d_; ++k) inv_h(k) = 2.0 * mesh.cells[k] / (mesh.hi(k) - mesh.lo(k));
  for (int v = 0; v < vol_rule_.points.rows(); ++v) {
    ShapeEval sh;
    shape_eval(d_, mesh.p, vol_rule_.points.row(v).transpose(), false, sh);
    Eigen::MatrixXd G(d_, nen);
    for (int a = 0; a < nen; ++a)
      for (int k = 0; k < d_; ++k) G(k, a) = sh.dN(a, k) * inv_h(k);
    vol_shapes_.push_back(std::move(sh));
    vol_grads_.push_back(std::move(G));
  }
}

void TraceAssembler::run(const Eigen::VectorXd& ufree, const Pass& out) const {
  const BackgroundMesh& mesh = prob_.mesh;
  const MaterialModel& m = prob_.material;
  const int nen = mesh.nodes_per_elem();
  const int nloc = nen * d_;
  const double eta = m.eta;
  Vec inv_h(d_);
  double detJbox = 1.0;
  for (int k = 0; k < d_; ++k) {
    inv_h(k) = 2.0 * mesh.cells[k] / (mesh.hi(k) - mesh.lo(k));
    detJbox /= inv_h(k);
  }
  Vec body;
  if (prob_.loads.body_force.size()) body = (load_factor_ * prob_.loads.body_force).eval();

  const bool want_r = out.r != nullptr;
  const bool want_K = out.trips != nullptr;
  Eigen::VectorXd r_el(nloc);
  Eigen::MatrixXd K_el;
  if (want_K) K_el.resize(nloc, nloc);
  ShapeEval sh;
  Eigen::MatrixXd Ue(d_, nen), Gfull(d_, nen);
  Eigen::VectorXd phie(nen);
  std::vector<int> dofs(nloc);

  for (std::size_t ie = 0; ie < geo_.active_elems.size(); ++ie) {
    const int e = geo_.active_elems[ie];
    const CutCellQuadrature& cut = geo_.cuts[ie];
    for (int a = 0; a < nen; ++a) {
      const int node = mesh.elems(e, a);
      const int blk = anode_index_[node];
      phie(a) = prob_.phi(node);
      for (int i = 0; i < d_; ++i) {
        Ue(i, a) = ufree(blk * d_ + i);
        dofs[a * d_ + i] = blk * d_ + i;
      }
    }
    r_el.setZero();
    if (want_K) K_el.setZero();

    for (int qp = 0; qp < cut.points_ref.rows(); ++qp) {
      shape_eval(d_, mesh.p, cut.points_ref.row(qp).transpose(), false, sh);
      for (int a = 0; a < nen; ++a)
        for (int k = 0; k < d_; ++k) Gfull(k, a) = sh.dN(a, k) * inv_h(k);
      const Vec gphi = Gfull * phie;
      const double gn = gphi.norm();
      if (gn <= kDegenerateTol)
        fail(ErrorCode::ZeroGradient, "vanishing level-set gradient at a cut point");
      const Vec Nstar = gphi / gn;
      Mat P = Mat::Identity(d_, d_);
      P.noalias() -= Nstar * Nstar.transpose();
      const Eigen::MatrixXd g = P * Gfull;
      Mat F = Mat::Identity(d_, d_);
      F.noalias() += Ue * g.transpose();
      const Vec u_interp = Ue * sh.N;
      const double w = cut.weights(qp) * eta;
      svk_point(m, s0_, w, sh.N, g, F, P, body, u_interp, want_r ? &r_el : nullptr,
                want_K ? &K_el : nullptr, out.pot, out.sen);
      if (out.meas) *out.meas += cut.weights(qp);
      if (out.dmeas) {
        Mat F_om = Mat::Identity(d_, d_);
        F_om.noalias() += Ue * Gfull.transpose();
        const double dJ = F_om.determinant();
        if (std::abs(dJ) <= kDegenerateTol)
          fail(ErrorCode::SingularDeformation, "singular ambient deformation gradient");
        const Vec nstar = F_om.inverse().transpose() * gphi;
        *out.dmeas += cut.weights(qp) * (nstar.norm() / gn) * std::abs(dJ);
      }
    }

    if (has_nitsche_ && (want_r || want_K)) {
      for (const auto& bp : cut.boundary) {
        shape_eval(d_, mesh.p, bp.xi, false, sh);
        for (int a = 0; a < nen; ++a)
          for (int k = 0; k < d_; ++k) Gfull(k, a) = sh.dN(a, k) * inv_h(k);
        const Vec gphi = Gfull * phie;
        const double gn = gphi.norm();
        if (gn <= kDegenerateTol)
          fail(ErrorCode::ZeroGradient, "vanishing level-set gradient at a boundary point");
        const Vec Nstar = gphi / gn;
        Mat P = Mat::Identity(d_, d_);
        P.noalias() -= Nstar * Nstar.transpose();
        const Eigen::MatrixXd g = P * Gfull;
        Mat F = Mat::Identity(d_, d_);
        F.noalias() += Ue * g.transpose();
        const Vec u_interp = Ue * sh.N;
        // conormal: the curve tangent oriented out of the domain
        Vec T(2);
        T << Nstar(1), -Nstar(0);
        const double orient = T.dot(bp.outward);
        if (std::abs(orient) < 1e-8)
          fail(ErrorCode::DegenerateCut, "zero set tangent to the domain boundary face");
        const Vec Nb = (orient > 0 ? 1.0 : -1.0) * T;

        const Mat C = F.transpose() * F;
        const Mat E_dir = 0.5 * (C - Mat::Identity(d_, d_));
        const Mat E_t = P * E_dir * P;
        Mat S_t = (m.lambda * E_t.trace()) * P + (2.0 * m.mu) * E_t;
        if (s0_ != 0.0) S_t += s0_ * P;

        const Vec Ghat = (load_factor_ * prob_.dirichlet(bp.X)).eval();
        const Vec diff = u_interp - Ghat;
        const double wb = bp.w * eta;

        const Eigen::MatrixXd f = F * g;           // d x nen, columns F g^b
        const Mat Cm = P * F.transpose();          // columns c^j
        const Mat Fc = F * Cm;                     // columns F c^j
        const Vec SNb = S_t * Nb;
        const Vec FNb = F * Nb;
        const Eigen::VectorXd gbNb = g.transpose() * Nb;   // nen
        const Vec cjNb = Cm.transpose() * Nb;              // d
        const Eigen::VectorXd gbSNb = g.transpose() * SNb; // nen
        const Vec KNb = F * SNb;

        // DKN(:, b d + j) = DK[b,j] Nb ; dsn(:, b d + j) = DS[b,j] Nb
        Eigen::MatrixXd DKN(d_, nloc), dsn(d_, nloc);
        for (int b = 0; b < nen; ++b) {
          for (int j = 0; j < d_; ++j) {
            const int col = b * d_ + j;
            dsn.col(col) = m.lambda * f(j, b) * Nb + m.mu * gbNb(b) * Cm.col(j) +
                           m.mu * cjNb(j) * g.col(b);
            Vec dk = m.lambda * f(j, b) * FNb + m.mu * gbNb(b) * Fc.col(j) +
                     m.mu * cjNb(j) * f.col(b);
            dk(j) += gbSNb(b);
            DKN.col(col) = dk;
          }
        }

        const bool slip = static_cast<bool>(prob_.slip_dir);
        Vec vd;
        if (slip) vd = prob_.slip_dir(bp.X);

        if (want_r) {
          if (!slip) {
            for (int a = 0; a < nen; ++a)
              for (int i = 0; i < d_; ++i)
                r_el(a * d_ + i) +=
                    wb * (-sh.N(a) * KNb(i) + diff.dot(DKN.col(a * d_ + i)));
          } else {
            const double KNb_s = KNb.dot(vd);
            const double diff_s = diff.dot(vd);
            for (int a = 0; a < nen; ++a)
              for (int i = 0; i < d_; ++i)
                r_el(a * d_ + i) += wb * (-sh.N(a) * vd(i) * KNb_s +
                                          diff_s * DKN.col(a * d_ + i).dot(vd));
          }
        }
        if (want_K) {
          const Eigen::MatrixXd gdsn = g.transpose() * dsn;  // nen x nloc
          const Eigen::MatrixXd gg = g.transpose() * g;
          if (!slip) {
            const Eigen::VectorXd fdiff = f.transpose() * diff;
            const double FNbdiff = FNb.dot(diff);
            for (int a = 0; a < nen; ++a) {
              for (int i = 0; i < d_; ++i) {
                const int ai = a * d_ + i;
                for (int b = 0; b < nen; ++b) {
                  for (int j = 0; j < d_; ++j) {
                    const int bj = b * d_ + j;
                    // diff . (D2K[a,i;b,j] Nb)
                    double d2 = diff(i) * gdsn(a, bj) + diff(j) * gdsn(b, ai);
                    if (i == j)
                      d2 += m.lambda * gg(a, b) * FNbdiff +
                            m.mu * (gbNb(b) * fdiff(a) + gbNb(a) * fdiff(b));
                    K_el(ai, bj) +=
                        wb * (-sh.N(a) * DKN(i, bj) + sh.N(b) * DKN(j, ai) + d2);
                  }
                }
              }
            }
          } else {
            const double diff_s = diff.dot(vd);
            const Eigen::VectorXd DKNvd = DKN.transpose() * vd;
            const Eigen::VectorXd fvd = f.transpose() * vd;
            const double FNbvd = FNb.dot(vd);
            for (int a = 0; a < nen; ++a) {
              for (int i = 0; i < d_; ++i) {
                const int ai = a * d_ + i;
                for (int b = 0; b < nen; ++b) {
                  for (int j = 0; j < d_; ++j) {
                    const int bj = b * d_ + j;
                    // vd . (D2K[a,i;b,j] Nb)
                    double d2v = vd(i) * gdsn(a, bj) + vd(j) * gdsn(b, ai);
                    if (i == j)
                      d2v += m.lambda * gg(a, b) * FNbvd +
                             m.mu * (gbNb(b) * fvd(a) + gbNb(a) * fvd(b));
                    K_el(ai, bj) += wb * (-sh.N(a) * vd(i) * DKNvd(bj) +
                                          sh.N(b) * vd(j) * DKNvd(ai) + diff_s * d2v);
                  }
                }
              }
            }
          }
        }
      }
    }

    if (rho_ != 0.0) {
      for (int v = 0; v < vol_rule_.points.rows(); ++v) {
        const Eigen::MatrixXd& G = vol_grads_[v];
        const Vec gphi = G * phie;
        const double gn = gphi.norm();
        if (gn <= kDegenerateTol)
          fail(ErrorCode::ZeroGradient,
               "vanishing level-set gradient at a stabilization point");
        const Vec Ne = gphi / gn;
        const Eigen::VectorXd s = G.transpose() * Ne;
        const double wv = vol_rule_.weights(v) * detJbox * rho_;
        const Vec t = Ue * s;
        if (out.pot) *out.pot += 0.5 * wv * t.squaredNorm();
        if (out.stab) *out.stab += wv * t.squaredNorm();
        if (want_r)
          for (int a = 0; a < nen; ++a)
            for (int i = 0; i < d_; ++i) r_el(a * d_ + i) += wv * s(a) * t(i);
        if (want_K) {
          for (int a = 0; a < nen; ++a)
            for (int b = 0; b < nen; ++b) {
              const double sab = wv * s(a) * s(b);
              for (int i = 0; i < d_; ++i) K_el(a * d_ + i, b * d_ + i) += sab;
            }
        }
      }
    }

    if (want_r)
      for (int l = 0; l < nloc; ++l) (*out.r)(dofs[l]) += r_el(l);
    if (want_K)
      for (int lr = 0; lr < nloc; ++lr)
        for (int lc = 0; lc < nloc; ++lc)
          out.trips->emplace_back(dofs[lr], dofs[lc], K_el(lr, lc));
  }
}

void TraceAssembler::assemble(const Eigen::VectorXd& ufree, Eigen::VectorXd* residual,
                              Eigen::SparseMatrix<double>* tangent) {
  Pass out;
  std::vector<Eigen::Triplet<double>> trips;
  if (residual) {
    residual->setZero(n_free());
    out.r = residual;
  }
  if (tangent) {
    trips.reserve(geo_.active_elems.size() * static_cast<std::size_t>(
                      prob_.mesh.nodes_per_elem() * d_ * prob_.mesh.nodes_per_elem() * d_));
    out.trips = &trips;
  }
  run(ufree, out);
  if (tangent) {
    tangent->resize(n_free(), n_free());
    tangent->setFromTriplets(trips.begin(), trips.end());
  }
}

double TraceAssembler::potential(const Eigen::VectorXd& ufree) {
  double pot = 0.0;
  Pass out;
  out.pot = &pot;
  run(ufree, out);
  return pot;
}

double TraceAssembler::strain_energy(const Eigen::VectorXd& ufree) {
  double sen = 0.0;
  Pass out;
  out.sen = &sen;
  run(ufree, out);
  return sen;
}

Eigen::VectorXd TraceAssembler::interpolate(const std::function<Vec(const Vec&)>& u) const {
  Eigen::VectorXd v(n_free());
  for (std::size_t blk = 0; blk < anode_ids_.size(); ++blk) {
    const Vec X = prob_.mesh.nodes.row(anode_ids_[blk]).transpose();
    const Vec uv = u(X);
    for (int i = 0; i < d_; ++i) v(blk * d_ + i) = uv(i);
  }
  return v;
}

EnergyReport TraceAssembler::energy(const Eigen::VectorXd& ufree) const {
  EnergyReport rep;
  Pass out;
  out.sen = &rep.strain_energy;
  out.meas = &rep.undeformed_measure;
  out.dmeas = &rep.deformed_measure;
  run(ufree, out);
  return rep;
}

double TraceAssembler::stabilization_energy(const Eigen::VectorXd& ufree) const {
  double stab = 0.0;
  Pass out;
  out.stab = &stab;
  run(ufree, out);
  return stab;
}

}  // namespace tdcfem
