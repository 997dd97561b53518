#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tdcfem/core.hpp"
#include "tdcfem/geom_parametric.hpp"

namespace tdcfem {

// Conforming higher-order Lagrange mesh of a q-dimensional manifold embedded
// in d dimensions. Element connectivity is lexicographic over the tensor-
// product reference nodes, first reference axis fastest.
struct SurfaceMesh {
  int q = 0;
  int d = 0;
  int p = 1;
  Eigen::MatrixXd nodes;  // n_nodes x d
  Eigen::MatrixXi elems;  // n_elems x (p+1)^q

  // Boundary facet of an element. Sides for q = 2 (reference square):
  // 0: xi1 = -1, 1: xi0 = +1, 2: xi1 = +1, 3: xi0 = -1.
  // Sides for q = 1: 0: xi0 = -1 (left end), 1: xi0 = +1 (right end).
  struct Facet {
    int elem = 0;
    int side = 0;
    int tag = 0;
  };
  std::vector<Facet> facets;

  // node-id/tag pairs for boundary nodes (a node may carry several tags)
  std::vector<std::pair<int, int>> node_tags;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_elems() const { return static_cast<int>(elems.rows()); }
  int nodes_per_elem() const { return static_cast<int>(elems.cols()); }
};

// Structured mesh of the reference box of a parametric patch with
// subdivisions per reference direction. Nodes lie on the exact geometry.
// Boundary facets and node tags carry the reference side index as tag.
SurfaceMesh mesh_from_patch(const ParametricPatch& patch, const std::vector<int>& subdivisions,
                            int p);

// Text file round trip. Header line `q d p n_nodes n_elems`, then node lines
// (d floats, 17 significant digits), element lines (zero-based indices), then
// boundary-tag lines `node_id tag`.
void save_mesh(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh load_mesh(const std::string& path);

// Reference geometry of a facet: edge parameter t in [-1,1] mapped to element
// reference coordinates xi, with the reference edge tangent tau and the
// outward reference normal nu (both in reference coordinates).
void facet_reference(int q, int side, double t, Vec& xi, Vec& tau, Vec& nu);

// Element-local node indices lying on a side, ordered along the side.
std::vector<int> side_local_nodes(int q, int p, int side);

// Largest element diameter (max pairwise node distance within an element).
double mesh_h_max(const SurfaceMesh& mesh);

}  // namespace tdcfem
