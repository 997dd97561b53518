#include "tdcfem/fem_surface.hpp"

#include <map>
#include <sstream>

#include "tdcfem/svk_kernel.hpp"

namespace tdcfem {

namespace {

PointFrame frame_with_context(int q, int d, const Mat& J, const Mat& grad_xi_u, int part,
                              int elem) {
  try {
    return frame_from_jacobian(q, d, J, grad_xi_u);
  } catch (const Error& e) {
    std::ostringstream os;
    os << e.what() << " [part " << part << ", element " << elem << "]";
    throw Error(e.code(), os.str());
  }
}

}  // namespace

SurfaceAssembler::SurfaceAssembler(SurfaceProblem problem) : prob_(std::move(problem)) {
  const CoupledMesh& cm = prob_.mesh;
  if (cm.n_parts() == 0) fail(ErrorCode::InvalidInput, "empty coupled mesh");
  d_ = cm.d;
  n_full_ = d_ * cm.n_global();
  if (prob_.loads.empty()) prob_.loads.resize(cm.n_parts());
  if (static_cast<int>(prob_.loads.size()) != cm.n_parts())
    fail(ErrorCode::InvalidInput, "one load record per part required");

  for (int pi = 0; pi < cm.n_parts(); ++pi) {
    const SurfaceMesh& mesh = cm.parts[pi];
    if (prob_.loads[pi].pressure != 0.0 && !(mesh.q == 2 && mesh.d == 3))
      fail(ErrorCode::InvalidInput, "follower pressure applies to membranes in 3-d only");
    if (prob_.loads[pi].pressure != 0.0) has_pressure_ = true;
    GaussCache ac, ec;
    ac.rule = gauss_rule(mesh.q, mesh.p + 1);
    ec.rule = gauss_rule(mesh.q, mesh.p + 2);
    for (auto* c : {&ac, &ec}) {
      c->shapes.resize(c->rule.points.rows());
      for (int iq = 0; iq < c->rule.points.rows(); ++iq) {
        Vec xi = c->rule.points.row(iq).transpose();
        shape_eval(mesh.q, mesh.p, xi, false, c->shapes[iq]);
      }
    }
    acache_.push_back(std::move(ac));
    ecache_.push_back(std::move(ec));
  }

  // constraint table with duplicate detection
  std::map<int, double> fixed;
  for (const NodeConstraint& c : prob_.dirichlet) {
    if (c.node < 0 || c.node >= cm.n_global() || c.comp < 0 || c.comp >= d_)
      fail(ErrorCode::InvalidInput, "constraint outside the mesh");
    const int dof = c.node * d_ + c.comp;
    auto it = fixed.find(dof);
    if (it != fixed.end() && it->second != c.value)
      fail(ErrorCode::InvalidInput, "conflicting constraint values on one dof");
    fixed[dof] = c.value;
  }
  free_index_.assign(n_full_, -1);
  fixed_values_ = Eigen::VectorXd::Zero(n_full_);
  for (auto& [dof, value] : fixed) fixed_values_[dof] = value;
  for (int dof = 0; dof < n_full_; ++dof) {
    if (fixed.count(dof)) continue;
    free_index_[dof] = static_cast<int>(free_dofs_.size());
    free_dofs_.push_back(dof);
  }
}

Eigen::VectorXd SurfaceAssembler::full_from_free(const Eigen::VectorXd& ufree) const {
  Eigen::VectorXd full = fixed_values_;
  for (size_t k = 0; k < free_dofs_.size(); ++k) full[free_dofs_[k]] = ufree[k];
  return full;
}

Eigen::VectorXd SurfaceAssembler::free_from_full(const Eigen::VectorXd& ufull) const {
  Eigen::VectorXd ufree(free_dofs_.size());
  for (size_t k = 0; k < free_dofs_.size(); ++k) ufree[k] = ufull[free_dofs_[k]];
  return ufree;
}

void SurfaceAssembler::pass(const Eigen::VectorXd& ufull, bool energy_rule,
                            Eigen::VectorXd* r_full,
                            std::vector<Eigen::Triplet<double>>* trips, double* pot,
                            double* sen, double* meas, double* dmeas) const {
  const CoupledMesh& cm = prob_.mesh;
  Eigen::MatrixXd Xe, Ue, g, K_el, M1(3, 3), M2(3, 3);
  Eigen::VectorXd r_el;

  for (int pi = 0; pi < cm.n_parts(); ++pi) {
    const SurfaceMesh& mesh = cm.parts[pi];
    const MaterialModel& mat = cm.materials[pi];
    const GaussCache& cache = energy_rule ? ecache_[pi] : acache_[pi];
    const int q = mesh.q, nen = mesh.nodes_per_elem();
    const Vec body = prob_.loads[pi].body_force.size()
                         ? Vec(load_factor_ * prob_.loads[pi].body_force)
                         : Vec();
    const double pf = load_factor_ * prob_.loads[pi].pressure;

    Xe.resize(nen, d_);
    Ue.resize(nen, d_);
    for (int e = 0; e < mesh.n_elems(); ++e) {
      for (int a = 0; a < nen; ++a) {
        const int gn = cm.node_map[pi][mesh.elems(e, a)];
        Xe.row(a) = cm.global_nodes.row(gn);
        Ue.row(a) = ufull.segment(gn * d_, d_).transpose();
      }
      const bool want_el = r_full || trips;
      if (want_el) {
        r_el = Eigen::VectorXd::Zero(nen * d_);
        K_el = Eigen::MatrixXd::Zero(nen * d_, nen * d_);
      }
      for (int iq = 0; iq < cache.rule.points.rows(); ++iq) {
        const ShapeEval& sh = cache.shapes[iq];
        Mat J = Xe.transpose() * sh.dN;
        Mat grad_xi_u = Ue.transpose() * sh.dN;
        PointFrame f = frame_with_context(q, d_, J, grad_xi_u, pi, e);
        const double w_geom = cache.rule.weights[iq] * f.sqrt_det_G;
        const double w = w_geom * mat.eta;
        g = f.Q * sh.dN.transpose();  // d x nen tangential basis gradients
        Vec u_interp = Ue.transpose() * sh.N;
        svk_point(mat, s0_, w, sh.N, g, f.F_gamma, f.P, body, u_interp,
                  want_el ? &r_el : nullptr, trips ? &K_el : nullptr, pot, sen);
        if (meas) *meas += w_geom;
        if (dmeas) *dmeas += w_geom * f.Lambda;

        if (pf != 0.0 && want_el) {
          // follower pressure: load p n(x) on the deformed surface; the
          // deformed tangent cross product carries measure and direction
          Vec t1 = f.j.col(0), t2 = f.j.col(1);
          Vec cr = cross3(t1, t2);
          const double wp = cache.rule.weights[iq] * pf;
          for (int a = 0; a < nen; ++a)
            for (int i = 0; i < d_; ++i) r_el[a * d_ + i] -= wp * sh.N[a] * cr[i];
          if (trips) {
            for (int j = 0; j < 3; ++j) {
              Vec ej = Vec::Zero(3);
              ej[j] = 1.0;
              M1.col(j) = cross3(ej, t2);
              M2.col(j) = cross3(t1, ej);
            }
            for (int a = 0; a < nen; ++a)
              for (int b = 0; b < nen; ++b)
                for (int i = 0; i < 3; ++i)
                  for (int j = 0; j < 3; ++j)
                    K_el(a * d_ + i, b * d_ + j) -=
                        wp * sh.N[a] * (sh.dN(b, 0) * M1(i, j) + sh.dN(b, 1) * M2(i, j));
          }
        }
      }
      if (want_el) {
        for (int a = 0; a < nen; ++a) {
          const int gn = cm.node_map[pi][mesh.elems(e, a)];
          for (int i = 0; i < d_; ++i) {
            const int dof = gn * d_ + i;
            if (r_full) (*r_full)[dof] += r_el[a * d_ + i];
            if (!trips || free_index_[dof] < 0) continue;
            for (int b = 0; b < nen; ++b) {
              const int gm = cm.node_map[pi][mesh.elems(e, b)];
              for (int j = 0; j < d_; ++j) {
                const int dof2 = gm * d_ + j;
                if (free_index_[dof2] < 0) continue;
                trips->emplace_back(free_index_[dof], free_index_[dof2],
                                    K_el(a * d_ + i, b * d_ + j));
              }
            }
          }
        }
      }
    }
  }

  // dead boundary tractions
  for (const TractionLoad& tl : prob_.tractions) {
    const SurfaceMesh& mesh = cm.parts[tl.part];
    const int nen = mesh.nodes_per_elem();
    if (mesh.q == 1) {
      const int local = side_local_nodes(1, mesh.p, tl.facet.side)[0];
      const int gn = cm.node_map[tl.part][mesh.elems(tl.facet.elem, local)];
      Vec X = cm.global_nodes.row(gn).transpose();
      Vec H = load_factor_ * tl.traction(X);
      for (int i = 0; i < d_; ++i)
        if (r_full) (*r_full)[gn * d_ + i] -= H[i];
      if (pot) *pot -= H.dot(ufull.segment(gn * d_, d_));
      continue;
    }
    QuadRule line = gauss_rule(1, mesh.p + 1);
    Xe.resize(nen, d_);
    Ue.resize(nen, d_);
    for (int a = 0; a < nen; ++a) {
      const int gn = cm.node_map[tl.part][mesh.elems(tl.facet.elem, a)];
      Xe.row(a) = cm.global_nodes.row(gn);
      Ue.row(a) = ufull.segment(gn * d_, d_).transpose();
    }
    for (int iq = 0; iq < line.points.rows(); ++iq) {
      Vec xi, tau, nu;
      facet_reference(2, tl.facet.side, line.points(iq, 0), xi, tau, nu);
      ShapeEval sh;
      shape_eval(2, mesh.p, xi, false, sh);
      Mat J = Xe.transpose() * sh.dN;
      const double ds = (J * tau).norm() * line.weights[iq];
      Vec X = Xe.transpose() * sh.N;
      Vec H = load_factor_ * tl.traction(X);
      for (int a = 0; a < nen; ++a) {
        const int gn = cm.node_map[tl.part][mesh.elems(tl.facet.elem, a)];
        for (int i = 0; i < d_; ++i)
          if (r_full) (*r_full)[gn * d_ + i] -= ds * sh.N[a] * H[i];
      }
      if (pot) *pot -= ds * H.dot(Vec(Ue.transpose() * sh.N));
    }
  }
}

void SurfaceAssembler::assemble(const Eigen::VectorXd& ufree, Eigen::VectorXd* residual,
                                Eigen::SparseMatrix<double>* tangent) {
  Eigen::VectorXd ufull = full_from_free(ufree);
  Eigen::VectorXd r_full;
  std::vector<Eigen::Triplet<double>> trips;
  if (residual || tangent) r_full = Eigen::VectorXd::Zero(n_full_);
  pass(ufull, false, (residual || tangent) ? &r_full : nullptr, tangent ? &trips : nullptr,
       nullptr, nullptr, nullptr, nullptr);
  if (residual) *residual = free_from_full(r_full);
  if (tangent) {
    tangent->resize(n_free(), n_free());
    tangent->setFromTriplets(trips.begin(), trips.end());
  }
}

double SurfaceAssembler::potential(const Eigen::VectorXd& ufree) {
  if (has_pressure_)
    fail(ErrorCode::InvalidInput, "no potential with follower pressure loads");
  double pot = 0.0;
  pass(full_from_free(ufree), false, nullptr, nullptr, &pot, nullptr, nullptr, nullptr);
  return pot;
}

double SurfaceAssembler::strain_energy(const Eigen::VectorXd& ufree) {
  double sen = 0.0;
  pass(full_from_free(ufree), true, nullptr, nullptr, nullptr, &sen, nullptr, nullptr);
  return sen;
}

EnergyReport SurfaceAssembler::energy(const Eigen::VectorXd& ufree) const {
  EnergyReport rep;
  pass(full_from_free(ufree), true, nullptr, nullptr, nullptr, &rep.strain_energy,
       &rep.undeformed_measure, &rep.deformed_measure);
  return rep;
}

}  // namespace tdcfem
