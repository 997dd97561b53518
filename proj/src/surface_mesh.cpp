#include "tdcfem/surface_mesh.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdcfem/lagrange.hpp"

namespace tdcfem {

SurfaceMesh mesh_from_patch(const ParametricPatch& patch, const std::vector<int>& subdivisions,
                            int p) {
  const int q = patch.q;
  if (static_cast<int>(subdivisions.size()) != q)
    fail(ErrorCode::InvalidInput, "subdivision count must match reference dimension");
  for (int n : subdivisions)
    if (n < 1) fail(ErrorCode::InvalidInput, "subdivisions must be positive");
  if (p < 1 || p > 12) fail(ErrorCode::InvalidInput, "unsupported element order");

  SurfaceMesh mesh;
  mesh.q = q;
  mesh.d = patch.d;
  mesh.p = p;

  std::array<int, 2> ne = {subdivisions[0], q == 2 ? subdivisions[1] : 1};
  std::array<int, 2> nn = {p * ne[0] + 1, q == 2 ? p * ne[1] + 1 : 1};

  mesh.nodes.resize(nn[0] * nn[1], patch.d);
  for (int j = 0; j < nn[1]; ++j) {
    for (int i = 0; i < nn[0]; ++i) {
      Vec r(q);
      r[0] = patch.ref_lo[0] +
             (patch.ref_hi[0] - patch.ref_lo[0]) * static_cast<double>(i) / (nn[0] - 1);
      if (q == 2)
        r[1] = patch.ref_lo[1] +
               (patch.ref_hi[1] - patch.ref_lo[1]) * static_cast<double>(j) / (nn[1] - 1);
      mesh.nodes.row(i + nn[0] * j) = patch.map(r).transpose();
    }
  }

  const int nen = n_basis(q, p);
  mesh.elems.resize(ne[0] * ne[1], nen);
  for (int ej = 0; ej < ne[1]; ++ej) {
    for (int ei = 0; ei < ne[0]; ++ei) {
      const int e = ei + ne[0] * ej;
      for (int aj = 0; aj <= (q == 2 ? p : 0); ++aj)
        for (int ai = 0; ai <= p; ++ai)
          mesh.elems(e, ai + (p + 1) * aj) = (ei * p + ai) + nn[0] * (ej * p + aj);
    }
  }

  auto add_tag = [&](int node, int tag) { mesh.node_tags.emplace_back(node, tag); };
  if (q == 1) {
    mesh.facets.push_back({0, 0, 0});
    mesh.facets.push_back({ne[0] - 1, 1, 1});
    add_tag(0, 0);
    add_tag(nn[0] - 1, 1);
  } else {
    for (int ei = 0; ei < ne[0]; ++ei) {
      mesh.facets.push_back({ei, 0, 0});
      mesh.facets.push_back({ei + ne[0] * (ne[1] - 1), 2, 2});
    }
    for (int ej = 0; ej < ne[1]; ++ej) {
      mesh.facets.push_back({(ne[0] - 1) + ne[0] * ej, 1, 1});
      mesh.facets.push_back({ne[0] * ej, 3, 3});
    }
    for (int i = 0; i < nn[0]; ++i) {
      add_tag(i, 0);
      add_tag(i + nn[0] * (nn[1] - 1), 2);
    }
    for (int j = 0; j < nn[1]; ++j) {
      add_tag(nn[0] - 1 + nn[0] * j, 1);
      add_tag(nn[0] * j, 3);
    }
  }
  return mesh;
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidInput, "cannot open mesh file for writing: " + path);
  out << mesh.q << " " << mesh.d << " " << mesh.p << " " << mesh.n_nodes() << " "
      << mesh.n_elems() << "\n";
  char buf[64];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    for (int k = 0; k < mesh.d; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", mesh.nodes(i, k));
      out << (k ? " " : "") << buf;
    }
    out << "\n";
  }
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int a = 0; a < mesh.nodes_per_elem(); ++a) out << (a ? " " : "") << mesh.elems(e, a);
    out << "\n";
  }
  for (const auto& nt : mesh.node_tags) out << nt.first << " " << nt.second << "\n";
}

SurfaceMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open mesh file: " + path);
  SurfaceMesh mesh;
  int n_nodes = 0, n_elems = 0;
  if (!(in >> mesh.q >> mesh.d >> mesh.p >> n_nodes >> n_elems))
    fail(ErrorCode::InvalidInput, "malformed mesh header");
  if (mesh.q < 1 || mesh.q > 2 || mesh.d < 2 || mesh.d > 3 || mesh.p < 1 || n_nodes < 1 ||
      n_elems < 1)
    fail(ErrorCode::InvalidInput, "mesh header out of range");
  mesh.nodes.resize(n_nodes, mesh.d);
  for (int i = 0; i < n_nodes; ++i)
    for (int k = 0; k < mesh.d; ++k)
      if (!(in >> mesh.nodes(i, k))) fail(ErrorCode::InvalidInput, "malformed node line");
  const int nen = n_basis(mesh.q, mesh.p);
  mesh.elems.resize(n_elems, nen);
  for (int e = 0; e < n_elems; ++e)
    for (int a = 0; a < nen; ++a) {
      if (!(in >> mesh.elems(e, a))) fail(ErrorCode::InvalidInput, "malformed element line");
      if (mesh.elems(e, a) < 0 || mesh.elems(e, a) >= n_nodes)
        fail(ErrorCode::InvalidInput, "element node index out of range");
    }
  int node = 0, tag = 0;
  while (in >> node >> tag) {
    if (node < 0 || node >= n_nodes) fail(ErrorCode::InvalidInput, "tag node index out of range");
    mesh.node_tags.emplace_back(node, tag);
  }
  return mesh;
}

void facet_reference(int q, int side, double t, Vec& xi, Vec& tau, Vec& nu) {
  if (q == 1) {
    xi = Vec(1);
    xi[0] = (side == 0) ? -1.0 : 1.0;
    tau = Vec(1);
    tau[0] = 1.0;
    nu = Vec(1);
    nu[0] = (side == 0) ? -1.0 : 1.0;
    return;
  }
  xi = Vec(2);
  tau = Vec::Zero(2);
  nu = Vec::Zero(2);
  switch (side) {
    case 0:
      xi << t, -1.0;
      tau[0] = 1.0;
      nu[1] = -1.0;
      break;
    case 1:
      xi << 1.0, t;
      tau[1] = 1.0;
      nu[0] = 1.0;
      break;
    case 2:
      xi << t, 1.0;
      tau[0] = 1.0;
      nu[1] = 1.0;
      break;
    case 3:
      xi << -1.0, t;
      tau[1] = 1.0;
      nu[0] = -1.0;
      break;
    default:
      fail(ErrorCode::InvalidInput, "facet side out of range");
  }
}

std::vector<int> side_local_nodes(int q, int p, int side) {
  std::vector<int> ids;
  if (q == 1) {
    ids.push_back(side == 0 ? 0 : p);
    return ids;
  }
  for (int a = 0; a <= p; ++a) {
    switch (side) {
      case 0: ids.push_back(a); break;
      case 1: ids.push_back(p + (p + 1) * a); break;
      case 2: ids.push_back(a + (p + 1) * p); break;
      case 3: ids.push_back((p + 1) * a); break;
      default: fail(ErrorCode::InvalidInput, "facet side out of range");
    }
  }
  return ids;
}

double mesh_h_max(const SurfaceMesh& mesh) {
  double h = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e)
    for (int a = 0; a < mesh.nodes_per_elem(); ++a)
      for (int b = a + 1; b < mesh.nodes_per_elem(); ++b)
        h = std::max(h, (mesh.nodes.row(mesh.elems(e, a)) - mesh.nodes.row(mesh.elems(e, b)))
                            .norm());
  return h;
}

}  // namespace tdcfem
