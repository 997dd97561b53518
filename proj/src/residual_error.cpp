#include "tdcfem/residual_error.hpp"

#include <cmath>

#include "tdcfem/dmat.hpp"

namespace tdcfem {

namespace {

// chain from reference point to stress divergences, carrying d/dxi_k along
EquilibriumPoint equilibrium_core(int q, int d, const MaterialModel& mat, const PartLoads& loads,
                                  double pretension, const ShapeEval& sh,
                                  const Eigen::MatrixXd& Xe, const Eigen::MatrixXd& Ue) {
  const int n_en = static_cast<int>(Xe.rows());

  DMat J = DMat::zero(d, q, q);
  DMat H = DMat::zero(d, q, q);
  J.v = (Xe.transpose() * sh.dN).eval();
  H.v = (Ue.transpose() * sh.dN).eval();
  for (int k = 0; k < q; ++k)
    for (int a = 0; a < n_en; ++a) {
      J.d[k] += Xe.row(a).transpose() * sh.d2N[a].row(k);
      H.d[k] += Ue.row(a).transpose() * sh.d2N[a].row(k);
    }

  DMat G = transpose(J) * J;
  DScalar detG = det(G);
  if (detG.v <= kDegenerateTol) fail(ErrorCode::SingularMetric, "degenerate element metric");
  DMat Gi = inverse(G);
  DMat Q = J * Gi;
  DMat P = Q * transpose(J);
  DMat F = DMat::identity(d, q) + H * transpose(Q);

  DMat E_dir = 0.5 * (transpose(F) * F - DMat::identity(d, q));
  DMat E_t = P * E_dir * P;
  DMat S = (mat.lambda * trace(E_t)) * P + 2.0 * mat.mu * E_t;
  if (pretension != 0.0) S = S + pretension * P;
  DMat K = F * S;

  DMat j = J + H;
  DMat g = transpose(j) * j;
  DScalar detg = det(g);
  if (detg.v <= kDegenerateTol)
    fail(ErrorCode::DegenerateDeformation, "deformation collapses the element");
  DMat q_op = j * inverse(g);
  DScalar Lambda = sqrt(detg / detG);
  DMat sigma = inv(Lambda) * (F * S * transpose(F));

  EquilibriumPoint out;
  out.Lambda = Lambda.v;
  out.div_K = Vec::Zero(d);
  out.div_sigma = Vec::Zero(d);
  for (int k = 0; k < q; ++k) {
    out.div_K += K.d[k] * Q.v.col(k);
    out.div_sigma += sigma.d[k] * q_op.v.col(k);
  }

  Vec f_x = Vec::Zero(d);
  if (loads.body_force.size()) f_x += Vec(loads.body_force / Lambda.v);
  if (loads.pressure != 0.0 && q == 2 && d == 3) {
    Eigen::Vector3d n_def = Eigen::Vector3d(j.v.col(0)).cross(Eigen::Vector3d(j.v.col(1)));
    f_x += Vec((loads.pressure / mat.eta) * n_def.normalized());
  }
  out.r_strong = out.div_sigma + f_x;
  return out;
}

// ambient-derivative chain for the immersed discretization; the background
// element is an axis-aligned box, so reference-to-physical is diagonal
EquilibriumPoint trace_core(int d, const MaterialModel& mat, const PartLoads& loads,
                            double pretension, const ShapeEval& sh, const Vec& inv_h,
                            const Eigen::MatrixXd& Ue, const Eigen::VectorXd& phie) {
  const int n_en = static_cast<int>(Ue.cols());
  DMat gu = DMat::zero(d, d, d);
  DMat gphi = DMat::zero(d, 1, d);
  Vec ga(d), ha(d);
  for (int a = 0; a < n_en; ++a) {
    for (int k = 0; k < d; ++k) ga(k) = sh.dN(a, k) * inv_h(k);
    gu.v += Ue.col(a) * ga.transpose();
    gphi.v += phie(a) * ga;
    for (int m = 0; m < d; ++m) {
      for (int j = 0; j < d; ++j) ha(j) = sh.d2N[a](j, m) * inv_h(j) * inv_h(m);
      gu.d[m] += Ue.col(a) * ha.transpose();
      gphi.d[m] += phie(a) * ha;
    }
  }

  DMat n2m = transpose(gphi) * gphi;
  DScalar n2 = DScalar::constant(n2m.v(0, 0), d);
  for (int m = 0; m < d; ++m) n2.d(m) = n2m.d[m](0, 0);
  if (n2.v <= kDegenerateTol * kDegenerateTol)
    fail(ErrorCode::ZeroGradient, "vanishing level-set gradient at a cut point");
  DScalar nn = sqrt(n2);
  DMat Nn = inv(nn) * gphi;
  DMat P = DMat::identity(d, d) - Nn * transpose(Nn);
  DMat F = DMat::identity(d, d) + gu * P;

  DMat E_dir = 0.5 * (transpose(F) * F - DMat::identity(d, d));
  DMat E_t = P * E_dir * P;
  DMat S = (mat.lambda * trace(E_t)) * P + 2.0 * mat.mu * E_t;
  if (pretension != 0.0) S = S + pretension * P;
  DMat K = F * S;

  EquilibriumPoint out;
  out.div_K = Vec::Zero(d);
  for (int m = 0; m < d; ++m) out.div_K += K.d[m] * P.v.col(m);

  Mat F_om = Mat::Identity(d, d) + gu.v;
  const double dJ = F_om.determinant();
  if (std::abs(dJ) <= kDegenerateTol)
    fail(ErrorCode::SingularDeformation, "singular ambient deformation gradient");
  const Vec nstar = F_om.inverse().transpose() * Vec(gphi.v.col(0));
  out.Lambda = (nstar.norm() / nn.v) * std::abs(dJ);

  out.div_sigma = out.div_K / out.Lambda;
  out.r_strong = out.div_sigma;
  if (loads.body_force.size()) out.r_strong += Vec(loads.body_force / out.Lambda);
  return out;
}

}  // namespace

EquilibriumPoint equilibrium_at(const SurfaceProblem& prob, const Eigen::VectorXd& ufull,
                                int part, int elem, const Vec& xi, double pretension) {
  const SurfaceMesh& mesh = prob.mesh.parts.at(part);
  if (mesh.p < 2)
    fail(ErrorCode::UnsupportedOrder, "strong-form residual needs element order p >= 2");
  const int n_en = mesh.nodes_per_elem();
  const int d = mesh.d;

  ShapeEval sh;
  shape_eval(mesh.q, mesh.p, xi, true, sh);
  Eigen::MatrixXd Xe(n_en, d), Ue(n_en, d);
  for (int a = 0; a < n_en; ++a) {
    const int gn = prob.mesh.node_map[part][mesh.elems(elem, a)];
    Xe.row(a) = prob.mesh.global_nodes.row(gn);
    Ue.row(a) = ufull.segment(d * gn, d).transpose();
  }
  PartLoads loads;
  if (part < static_cast<int>(prob.loads.size())) loads = prob.loads[part];
  return equilibrium_core(mesh.q, d, prob.mesh.materials[part], loads, pretension, sh, Xe, Ue);
}

double residual_error(const SurfaceProblem& prob, const Eigen::VectorXd& ufull,
                      double pretension) {
  double total = 0.0;
  for (int part = 0; part < prob.mesh.n_parts(); ++part) {
    const SurfaceMesh& mesh = prob.mesh.parts[part];
    if (mesh.p < 2)
      fail(ErrorCode::UnsupportedOrder, "strong-form residual needs element order p >= 2");
    const int q = mesh.q;
    const int d = mesh.d;
    const int n_en = mesh.nodes_per_elem();
    PartLoads loads;
    if (part < static_cast<int>(prob.loads.size())) loads = prob.loads[part];

    QuadRule rule = gauss_rule(q, mesh.p + 2);
    std::vector<ShapeEval> shapes(rule.points.rows());
    for (int gp = 0; gp < rule.points.rows(); ++gp)
      shape_eval(q, mesh.p, rule.points.row(gp).transpose(), true, shapes[gp]);

    Eigen::MatrixXd Xe(n_en, d), Ue(n_en, d);
    for (int e = 0; e < mesh.n_elems(); ++e) {
      for (int a = 0; a < n_en; ++a) {
        const int gn = prob.mesh.node_map[part][mesh.elems(e, a)];
        Xe.row(a) = prob.mesh.global_nodes.row(gn);
        Ue.row(a) = ufull.segment(d * gn, d).transpose();
      }
      for (int gp = 0; gp < rule.points.rows(); ++gp) {
        EquilibriumPoint ep = equilibrium_core(q, d, prob.mesh.materials[part], loads, pretension,
                                               shapes[gp], Xe, Ue);
        Mat Jv = Xe.transpose() * shapes[gp].dN;
        const double detG = (Jv.transpose() * Jv).determinant();
        total += rule.weights[gp] * std::sqrt(detG) * ep.r_strong.squaredNorm();
      }
    }
  }
  return std::sqrt(total);
}

namespace {

void trace_gather(const TraceAssembler& as, const Eigen::VectorXd& ufree, int elem,
                  Eigen::MatrixXd& Ue, Eigen::VectorXd& phie, Vec& inv_h) {
  const BackgroundMesh& mesh = as.mesh();
  const int d = mesh.d;
  const int n_en = mesh.nodes_per_elem();
  Ue.resize(d, n_en);
  phie.resize(n_en);
  inv_h.resize(d);
  for (int k = 0; k < d; ++k) inv_h(k) = 2.0 * mesh.cells[k] / (mesh.hi(k) - mesh.lo(k));
  for (int a = 0; a < n_en; ++a) {
    const int node = mesh.elems(elem, a);
    const int blk = as.node_block()[node];
    phie(a) = as.problem().phi(node);
    for (int i = 0; i < d; ++i) Ue(i, a) = ufree(blk * d + i);
  }
}

}  // namespace

EquilibriumPoint equilibrium_at(const TraceAssembler& assembler, const Eigen::VectorXd& ufree,
                                int active_elem, const Vec& xi, double pretension) {
  const BackgroundMesh& mesh = assembler.mesh();
  if (mesh.p < 2)
    fail(ErrorCode::UnsupportedOrder, "strong-form residual needs element order p >= 2");
  const TraceGeometry& geo = assembler.geometry();
  const int e = geo.active_elems.at(active_elem);
  ShapeEval sh;
  shape_eval(mesh.d, mesh.p, xi, true, sh);
  Eigen::MatrixXd Ue;
  Eigen::VectorXd phie;
  Vec inv_h;
  trace_gather(assembler, ufree, e, Ue, phie, inv_h);
  return trace_core(mesh.d, assembler.problem().material, assembler.problem().loads, pretension,
                    sh, inv_h, Ue, phie);
}

double residual_error(const TraceAssembler& assembler, const Eigen::VectorXd& ufree,
                      double pretension) {
  const BackgroundMesh& mesh = assembler.mesh();
  if (mesh.p < 2)
    fail(ErrorCode::UnsupportedOrder, "strong-form residual needs element order p >= 2");
  const TraceGeometry& geo = assembler.geometry();
  const MaterialModel& mat = assembler.problem().material;
  const PartLoads& loads = assembler.problem().loads;

  double total = 0.0;
  ShapeEval sh;
  Eigen::MatrixXd Ue;
  Eigen::VectorXd phie;
  Vec inv_h;
  for (std::size_t ie = 0; ie < geo.active_elems.size(); ++ie) {
    const CutCellQuadrature& cut = geo.cuts[ie];
    trace_gather(assembler, ufree, geo.active_elems[ie], Ue, phie, inv_h);
    for (int qp = 0; qp < cut.points_ref.rows(); ++qp) {
      shape_eval(mesh.d, mesh.p, cut.points_ref.row(qp).transpose(), true, sh);
      EquilibriumPoint ep = trace_core(mesh.d, mat, loads, pretension, sh, inv_h, Ue, phie);
      total += cut.weights(qp) * ep.r_strong.squaredNorm();
    }
  }
  return std::sqrt(total);
}

}  // namespace tdcfem
