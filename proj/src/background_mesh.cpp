#include "tdcfem/background_mesh.hpp"

#include <algorithm>
#include <cmath>

#include "tdcfem/lagrange.hpp"

namespace tdcfem {

std::array<int, 3> BackgroundMesh::element_index(int e) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < d; ++k) {
    idx[k] = e % cells[k];
    e /= cells[k];
  }
  return idx;
}

int BackgroundMesh::element_id(const std::array<int, 3>& idx) const {
  int e = 0;
  for (int k = d - 1; k >= 0; --k) e = e * cells[k] + idx[k];
  return e;
}

void BackgroundMesh::element_box(int e, Vec& lo_e, Vec& hi_e) const {
  const std::array<int, 3> idx = element_index(e);
  lo_e = Vec::Zero(d);
  hi_e = Vec::Zero(d);
  for (int k = 0; k < d; ++k) {
    const double h = (hi(k) - lo(k)) / cells[k];
    lo_e(k) = lo(k) + idx[k] * h;
    hi_e(k) = lo_e(k) + h;
  }
}

double BackgroundMesh::h_max() const {
  double h = 0.0;
  for (int k = 0; k < d; ++k) h = std::max(h, (hi(k) - lo(k)) / cells[k]);
  return h;
}

BackgroundMesh background_box(int d, const Vec& lo, const Vec& hi,
                              const std::array<int, 3>& cells, int p) {
  if (d != 2 && d != 3) fail(ErrorCode::InvalidInput, "background mesh needs d in {2,3}");
  if (p < 1) fail(ErrorCode::UnsupportedOrder, "background mesh needs p >= 1");
  BackgroundMesh mesh;
  mesh.d = d;
  mesh.p = p;
  mesh.lo = lo;
  mesh.hi = hi;
  mesh.cells = {1, 1, 1};
  std::array<int, 3> npts{1, 1, 1};
  long n_nodes = 1;
  for (int k = 0; k < d; ++k) {
    if (cells[k] < 1) fail(ErrorCode::InvalidInput, "background mesh needs >= 1 cell per axis");
    if (!(hi(k) > lo(k))) fail(ErrorCode::InvalidInput, "empty background box");
    mesh.cells[k] = cells[k];
    npts[k] = cells[k] * p + 1;
    n_nodes *= npts[k];
  }
  mesh.nodes.resize(n_nodes, d);
  for (long id = 0; id < n_nodes; ++id) {
    long rem = id;
    for (int k = 0; k < d; ++k) {
      const long i = rem % npts[k];
      rem /= npts[k];
      mesh.nodes(id, k) = lo(k) + (hi(k) - lo(k)) * static_cast<double>(i) / (npts[k] - 1);
    }
  }
  long n_elems = 1;
  for (int k = 0; k < d; ++k) n_elems *= cells[k];
  const int npe = n_basis(d, p);
  mesh.elems.resize(n_elems, npe);
  for (long e = 0; e < n_elems; ++e) {
    std::array<long, 3> cell{0, 0, 0};
    long rem = e;
    for (int k = 0; k < d; ++k) {
      cell[k] = rem % cells[k];
      rem /= cells[k];
    }
    for (int a = 0; a < npe; ++a) {
      long loc = a;
      long id = 0, stride = 1;
      for (int k = 0; k < d; ++k) {
        const long i = cell[k] * p + loc % (p + 1);
        loc /= (p + 1);
        id += i * stride;
        stride *= npts[k];
      }
      mesh.elems(e, a) = static_cast<int>(id);
    }
  }
  return mesh;
}

Eigen::VectorXd sample_nodes(const BackgroundMesh& mesh,
                             const std::function<double(const Vec&)>& f) {
  Eigen::VectorXd vals(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const Vec X = mesh.nodes.row(i).transpose();
    vals(i) = f(X);
  }
  return vals;
}

double TraceGeometry::measure() const {
  double total = 0.0;
  for (const CutCellQuadrature& cut : cuts) total += cut.weights.sum();
  return total;
}

TraceGeometry detect_active(const BackgroundMesh& mesh, const Eigen::VectorXd& phi,
                            int order, const Eigen::VectorXd* phi2,
                            const Eigen::VectorXd* psi, bool cut_domain_faces) {
  if (phi.size() != mesh.n_nodes())
    fail(ErrorCode::InvalidInput, "level-set nodal vector does not match mesh");
  if (phi2 && phi2->size() != mesh.n_nodes())
    fail(ErrorCode::InvalidInput, "second level-set nodal vector does not match mesh");
  if (psi && psi->size() != mesh.n_nodes())
    fail(ErrorCode::InvalidInput, "clip nodal vector does not match mesh");
  TraceGeometry geo;
  geo.elem_active.assign(mesh.n_elems(), 0);
  geo.node_active.assign(mesh.n_nodes(), 0);
  const int npe = mesh.nodes_per_elem();
  Eigen::VectorXd phi_e(npe), phi2_e(npe), psi_e(npe);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int a = 0; a < npe; ++a) {
      const int id = mesh.elems(e, a);
      phi_e(a) = phi(id);
      if (phi2) phi2_e(a) = (*phi2)(id);
      if (psi) psi_e(a) = (*psi)(id);
    }
    Vec lo_e, hi_e;
    mesh.element_box(e, lo_e, hi_e);
    std::array<bool, 6> faces{};
    bool any_face = false;
    if (cut_domain_faces) {
      const std::array<int, 3> idx = mesh.element_index(e);
      for (int k = 0; k < mesh.d; ++k) {
        if (idx[k] == 0) faces[2 * k] = any_face = true;
        if (idx[k] == mesh.cells[k] - 1) faces[2 * k + 1] = any_face = true;
      }
    }
    try {
      CutCellQuadrature cut = cut_element_quadrature(
          mesh.d, mesh.p, lo_e, hi_e, phi_e, order, phi2 ? &phi2_e : nullptr,
          psi ? &psi_e : nullptr, any_face ? &faces : nullptr);
      geo.active_elems.push_back(e);
      geo.cuts.push_back(std::move(cut));
      geo.elem_active[e] = 1;
      for (int a = 0; a < npe; ++a) geo.node_active[mesh.elems(e, a)] = 1;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NoIntersection) throw;
    }
  }
  if (geo.active_elems.empty())
    fail(ErrorCode::EmptyTrace, "level set does not cut any background element");
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (geo.node_active[i]) geo.active_nodes.push_back(i);
  return geo;
}

}  // namespace tdcfem
